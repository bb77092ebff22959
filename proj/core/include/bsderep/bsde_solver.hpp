#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsderep/generator_model.hpp"
#include "bsderep/stochastic_engine.hpp"

namespace bsderep {

enum class Scheme { PicardLsmc, NestedMc, Pde1d };
const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct SolverConfig {
    Scheme scheme = Scheme::PicardLsmc;
    unsigned picard_iters = 8;
    unsigned basis_degree = 2;
    /// Clamp on |Z|; a hit is counted and reported as a warning.
    std::optional<double> z_cap;
    /// Stagnation threshold on max_j mean_i |Y^{(m+1)}_j - Y^{(m)}_j|.
    double tolerance = 1e-8;
    unsigned jobs = 0;  // 0: default_jobs()

    void validate() const;
};

/// Grid-indexed per-path estimates of (Y, Z) for the stopped BSDE.
struct BsdeSolution {
    std::size_t n_paths = 0;
    std::size_t n_nodes = 0;
    std::size_t dimension = 0;
    std::vector<double> Y;  // (path, node)
    std::vector<double> Z;  // (path, node, component)

    double y0 = 0.0;
    /// Standard error of y0: std(ζ)/√n with ζ = ξ + Σ_{j<τ} g_j Δ.
    double y0_se = 0.0;
    std::vector<double> picard_deltas;      // per iteration, max over nodes
    std::vector<double> condition_numbers;  // per node (1 at node 0)
    double residual = 0.0;                  // RMS one-step residual
    double apriori_bound = 0.0;
    bool converged = true;
    std::size_t z_cap_hits = 0;
    std::vector<std::string> warnings;

    double y(std::size_t path, std::size_t node) const { return Y[path * n_nodes + node]; }
    std::span<const double> z(std::size_t path, std::size_t node) const {
        return {Z.data() + (path * n_nodes + node) * dimension, dimension};
    }
    double max_abs_y() const;
};

/// (‖ξ‖_∞ + ‖∫f‖_∞)·exp(‖∫u‖_∞).
double apriori_bound(double xi_sup, double f_bound, double u_bound);

/// Picard least-squares Monte Carlo for
///   Y_s = ξ + ∫_s^{t0+ε} 1{r<τ} g(r, Y_r, Z_r) dr - ∫_s^{t0+ε} ⟨Z_r, dB_r⟩.
///
/// Backward in time, each node regresses on the monomials of the scaled
/// displacement, takes Z from a control-variate regression and resolves the
/// implicit Y_j = E_j[Y_{j+1}] + Δ g(s_j, Y_j, Z_j) by Picard iteration.
/// Paths at or beyond τ carry Y = ξ and Z = 0. `apriori` is recorded on the
/// solution for the bound check and does not alter the scheme.
///
/// Throws SingularRegressionError when a design matrix is singular and
/// ParameterError when the terminal and the batch disagree or the scheme
/// is not picard-lsmc.
BsdeSolution solve(const DriverFn& driver, const StoppedTerminal& terminal, const PathBatch& batch,
                   const SolverConfig& config, double apriori = 0.0);

struct ResidualReport {
    double rms = 0.0;
    double max_abs = 0.0;
    std::size_t terms = 0;
};

/// Residuals r_j = Y_{j+1} - Y_j + 1{j<τ} g(s_j, Y_j, Z_j) Δ - ⟨Z_j, ΔB_j⟩
/// over all (path, step) pairs with the path active at s_j.
ResidualReport residual_check(const BsdeSolution& solution, const DriverFn& driver,
                              const PathBatch& batch);

// ---- nested Monte Carlo backend ------------------------------------------

struct NestedMcConfig {
    std::size_t outer = 2000;
    std::size_t inner = 16;  // children per tree node
    std::size_t steps = 4;
    double budget = 4e8;  // node evaluations
    std::uint64_t seed = 1;
    /// false solves the unstopped equation (terminal y + ⟨z, B_{t0+ε} - B_{t0}⟩).
    bool honor_stopping = true;
};

struct NestedMcResult {
    double y0 = 0.0;
    double se = 0.0;
    double cost = 0.0;
    double stopped_fraction = 0.0;  // share of leaves absorbed before ε
};

/// Evaluation count outer·Σ_{j=1..steps} inner^j of a nested run.
double nested_mc_cost(const NestedMcConfig& config);

/// Random-tree estimate of Y_{t0} for terminal y + ⟨z, B_{(t0+ε)∧τ} - B_{t0}⟩.
///
/// Every conditional expectation is a fresh average over `inner` children;
/// Z at a node is the least-squares slope of Y + Δg over the children's
/// increments and Y uses the trapezoidal rule in time. Throws BudgetError when
/// the cost exceeds the budget and ParameterError when steps > 8 or inner
/// is too small for the dimension.
NestedMcResult nested_mc(const DriverFn& driver, double y, std::span<const double> z, double t0,
                         double epsilon, const StoppingIntegrand& phi_at_K,
                         const NestedMcConfig& config, std::span<const double> base = {});

// ---- one-dimensional PDE backend -----------------------------------------

struct Pde1dConfig {
    std::size_t space_intervals = 200;
    /// 0 picks 1.25× the stability minimum; a smaller explicit value is
    /// refused with a CflError carrying the required count.
    std::size_t time_steps = 0;
    /// Bound on the z-growth used in the stability restriction.
    double gamma = 1.0;
};

/// Explicit finite differences for u_s + ½u_xx + g(s, u, u_x) = 0 on
/// x ∈ [-1, 1], u(t0+ε, x) = y + zx, with u = y + zx wherever
/// |x| ≥ 1 - ∫_{t0}^s φ_r(K)² dr.
class Pde1dSolution {
public:
    Pde1dSolution(double t0, double epsilon, std::vector<double> x, std::vector<double> times,
                  std::vector<double> layers);

    double y0() const;  // u(t0, 0)
    double value(double s, double x) const;
    double derivative(double s, double x) const;
    std::size_t time_steps() const { return times_.size() - 1; }
    std::size_t space_intervals() const { return x_.size() - 1; }

private:
    std::size_t layer_index(double s) const;
    double t0_;
    double epsilon_;
    std::vector<double> x_;
    std::vector<double> times_;
    std::vector<double> layers_;  // (time index, x index)
};

/// `phi_at_K` must be deterministic: it is evaluated with a zero displacement.
Pde1dSolution solve_pde_1d(const DriverFn& driver, double y, double z, double t0, double epsilon,
                           const std::function<double(double)>& phi_at_K, const Pde1dConfig& config);

/// Smallest time-step count that meets the stability restriction.
std::size_t pde_1d_required_steps(double epsilon, std::size_t space_intervals, double gamma, double z);

void write_solution_csv(const BsdeSolution& solution, std::ostream& out);

}  // namespace bsderep
