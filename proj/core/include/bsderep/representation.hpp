#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsderep/bsde_solver.hpp"
#include "bsderep/errors.hpp"
#include "bsderep/generator_model.hpp"
#include "bsderep/stochastic_engine.hpp"

namespace bsderep {

enum class LimitMode { L1, Pointwise };
const char* to_string(LimitMode m);
LimitMode parse_mode(const std::string& name);

struct RepresentationProblem {
    double t = 0.0;
    double y = 0.0;
    std::vector<double> z;
    GeneratorSpec spec;
    LimitMode mode = LimitMode::L1;

    /// Pointwise mode needs φ(x) ∈ H^∞, L¹ mode needs the square-integrability
    /// of φ; throws ParameterError otherwise.
    void validate() const;
};

struct LadderRung {
    double epsilon = 0.0;
    std::size_t steps = 32;
    std::size_t paths = 100000;
};

struct EpsilonLadder {
    std::vector<LadderRung> rungs;

    /// Strictly decreasing and each ε ≤ (T - t) ∧ 1.
    void validate(double t, double horizon) const;
};

/// Steps per rung: max(32, ⌈64·ε/2⁻³⌉).
std::size_t default_steps(double epsilon);
/// ε ∈ {2⁻³, ..., 2⁻⁸} with default steps and `paths` paths per rung.
EpsilonLadder default_ladder(std::size_t paths = 100000);
EpsilonLadder make_ladder(const std::vector<double>& epsilons, std::size_t paths);

/// Ỹ_s = Y_s - y - ⟨z, B_{s∧τ} - B_t⟩ and Z̃_s = Z_s - 1{s<τ}z.
struct TildeProcesses {
    std::size_t n_paths = 0;
    std::size_t n_nodes = 0;
    std::size_t dimension = 0;
    std::vector<double> Y;
    std::vector<double> Z;
    double max_abs_y = 0.0;
    double k = 0.0;
    /// Path-node pairs with |Ỹ| > k·1.05.
    std::size_t k_exceedances = 0;

    double y(std::size_t path, std::size_t node) const { return Y[path * n_nodes + node]; }
    std::span<const double> z(std::size_t path, std::size_t node) const {
        return {Z.data() + (path * n_nodes + node) * dimension, dimension};
    }
};

TildeProcesses tilde_transform(const BsdeSolution& solution, const PathBatch& batch, double y,
                               std::span<const double> z, double k);

struct SqrtEpsCheck {
    double sup_abs = 0.0;
    double bound = 0.0;  // √ε·C
    double ratio = 0.0;
    bool passed = true;
};

/// sup |Ỹ| ≤ √ε·C·(1+slack).
SqrtEpsCheck sqrt_eps_bound_check(const TildeProcesses& tilde, const GrowthEnvelope& envelope,
                                  double epsilon, double slack = 0.05);

struct Prop32Diagnostics {
    double y_mean = 0.0;  // (1/ε) E ∫|Ỹ| dr
    double y_se = 0.0;
    double z_mean = 0.0;  // (1/ε) E ∫|Z̃|² dr
    double z_se = 0.0;
    /// Conditional on F_t; with t = 0 or a frozen prefix these are the plain means.
    double y_conditional = 0.0;
    double z_conditional = 0.0;
};

/// Left-endpoint quadrature over the grid, averaged over paths.
Prop32Diagnostics prop32_diagnostics(const TildeProcesses& tilde, const TimeGrid& grid);

struct QuotientDecomposition {
    double m_term = 0.0;  // ĝ_ε
    double n_term = 0.0;  // (1/ε) E ∫ g̃(r, 0, 0) dr
    double n_se = 0.0;
    double g_tilde_t = 0.0;  // g̃(t, 0, 0) = g(t, y, z)
    double m_minus_n = 0.0;
    double n_minus_g = 0.0;
};

/// N_term evaluates g(s_j, y + ⟨z, B_{s_j∧τ} - B_t⟩, z) for s_j < τ along the batch.
QuotientDecomposition quotient_decomposition_diagnostic(const RepresentationProblem& problem,
                                                        const PathBatch& batch, double g_hat);

struct RungReport {
    double epsilon = 0.0;
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::size_t replicates = 1;
    double g_hat = 0.0;
    double se = 0.0;
    double abs_err = 0.0;
    /// Mean over replicates of |ĝ_ε,r - g|, the empirical L¹ error.
    double l1_err = 0.0;
    /// max_r (|ĝ_ε,r - g| - 3 SE_r)⁺, used by the pointwise check.
    double excess_err = 0.0;
    double max_run_err = 0.0;
    double sup_ytilde = 0.0;
    double sqrt_eps_c = 0.0;
    double sup_ytilde_ratio = 0.0;
    double ratio_se = 0.0;
    double max_abs_y = 0.0;
    double apriori_bound = 0.0;
    double max_abs_ytilde = 0.0;
    double k = 0.0;
    double K = 0.0;
    double prop32_y = 0.0;
    double prop32_y_se = 0.0;
    double prop32_z = 0.0;
    double prop32_z_se = 0.0;
    double m_term = 0.0;
    double n_term = 0.0;
    double m_minus_n = 0.0;
    double n_minus_g = 0.0;
    double barrier_bound = 0.0;
    double stopped_fraction = 0.0;
    double max_overshoot = 0.0;
    double residual = 0.0;
    bool converged = true;
    std::size_t z_cap_hits = 0;
    std::vector<std::string> flags;
};

struct InvariantCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct RepresentationReport {
    std::string generator;
    LimitMode mode = LimitMode::L1;
    double t = 0.0;
    double y = 0.0;
    std::vector<double> z;
    double g_target = 0.0;
    std::uint64_t seed = 0;
    std::vector<RungReport> rungs;
    double fitted_order = 0.0;
    std::vector<InvariantCheck> checks;
    bool all_converged = true;

    bool passed() const;
};

struct RepresentationOptions {
    std::uint64_t seed = 20240601;
    /// Independent replicates per rung; 0 picks 16 for path-dependent
    /// generators and 1 otherwise.
    std::size_t outer_seeds = 0;
    /// Sample budget of the (H1)/(H2) pre-check; 0 skips it.
    std::size_t compliance_samples = 4000;
};

/// Thrown when the generator fails the sampled (H1)/(H2) pre-check.
class ComplianceError : public BsdeError {
public:
    ComplianceError(const std::string& what, std::vector<ComplianceReport> reports)
        : BsdeError(what), reports_(std::move(reports)) {}
    const std::vector<ComplianceReport>& reports() const { return reports_; }

private:
    std::vector<ComplianceReport> reports_;
};

/// For every rung: envelope, paths, τ, stopped terminal, solve, quotient and
/// all diagnostics; then the convergence fit and the invariant checks.
RepresentationReport run_representation(const RepresentationProblem& problem,
                                        const EpsilonLadder& ladder, const SolverConfig& config,
                                        const RepresentationOptions& options = {});

/// Least-squares slope of log(err) against log(ε) over rungs with err > 0.
double fit_log_slope(std::span<const double> epsilons, std::span<const double> errors);

/// Runs the invariant checks on an assembled report (used by run_representation).
std::vector<InvariantCheck> evaluate_invariants(const RepresentationReport& report);

/// Frozen CSV: epsilon,g_hat,se,abs_err,sup_ytilde_ratio,prop32_y,prop32_z,flags
void write_report_csv(const RepresentationReport& report, std::ostream& out);
/// Every RungReport field, one row per rung.
void write_report_detail_csv(const RepresentationReport& report, std::ostream& out);

}  // namespace bsderep
