#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bsderep/bsde_solver.hpp"
#include "bsderep/stochastic_engine.hpp"

namespace bsderep {

/// e^{aε}(y + ⟨z,b⟩ε) + c(e^{aε} - 1)/a, with the a → 0 limit y + ⟨z,b⟩ε + cε.
/// Ignores the stopping barrier.
double linear_closed_form(double a, std::span<const double> b, double c, double y,
                          std::span<const double> z, double epsilon);

/// y + γ|z|²ε: exp(2γY) is a martingale with terminal exp(2γξ).
double quadratic_closed_form(double gamma, double y, std::span<const double> z, double epsilon);

/// A closed-form problem together with its validation data.
struct OracleCase {
    std::string name;
    std::string family;  // "linear" or "pure-quadratic"
    double a = 0.0;
    std::vector<double> b;
    double c = 0.0;
    double gamma = 0.0;
    double y = 0.0;
    std::vector<double> z;
    double epsilon = 0.1;

    double closed_form() const;
    GeneratorSpec generator() const;
    std::size_t dimension() const { return z.size(); }
};

/// The three linear cases and the quadratic case used to validate the solver.
std::vector<OracleCase> default_oracle_cases();

struct OracleSuiteConfig {
    double tolerance_sigmas = 3.0;
    /// Extra absolute slack; 0 means the plain ± tolerance_sigmas·SE rule.
    double absolute_tolerance = 0.0;
    /// When set, replaces every computed row tolerance.
    std::optional<double> fixed_tolerance;
    NestedMcConfig nested{1000, 16, 4};
    std::size_t lsmc_paths = 100000;
    std::size_t lsmc_steps = 32;
    std::size_t pde_space_intervals = 200;
    SolverConfig solver;
    std::uint64_t seed = 7;
};

struct OracleRow {
    std::string name;
    std::string backend;  // nested-mc | picard-lsmc | pde-1d
    double epsilon = 0.0;
    double closed_form = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    /// |Y(steps) - Y(steps/2)| of the nested tree; zero for other backends.
    double discretization = 0.0;
    double abs_diff = 0.0;
    double tolerance = 0.0;
    double barrier_bound = 0.0;
    bool passed = false;
};

struct OracleSuiteResult {
    std::vector<OracleRow> rows;
    bool passed() const;
};

/// Validates each closed form by unstopped nested MC (tolerance: sigmas·SE
/// plus the half-step discretization estimate), then compares picard-lsmc
/// (max(sigmas·SE, 10Δ)) and, in one dimension, pde-1d (max(sigmas·SE_nested,
/// 10Δx²)) on the stopped problem. A backend row fails unless the nested
/// validation of its case passed.
OracleSuiteResult run_oracle_suite(const std::vector<OracleCase>& cases,
                                   const OracleSuiteConfig& config);

void write_oracle_csv(const OracleSuiteResult& result, std::ostream& out);

// ---- Lebesgue differentiation --------------------------------------------

struct LebesgueRow {
    double epsilon = 0.0;
    double average = 0.0;  // (1/ε)∫_t^{t+ε} f
    double target = 0.0;   // f(t)
    double abs_err = 0.0;
    double quadrature_error = 0.0;
};

/// Composite 8-point Gauss–Legendre on `panels` panels; the quadrature error
/// estimate is the difference to the same rule on half as many panels.
std::vector<LebesgueRow> lebesgue_check(const std::function<double(double)>& f, double t,
                                        std::span<const double> epsilons, std::size_t panels = 64);

struct ConditionalLebesgueRow {
    double epsilon = 0.0;
    double mean_average = 0.0;   // mean over paths of (1/ε)∫_t^{t+ε} f_r dr
    double mean_target = 0.0;    // mean over paths of f_t
    double mean_abs_err = 0.0;   // mean over paths of |average - f_t|
    double max_abs_err = 0.0;
    std::size_t steps = 0;
};

/// Trapezoidal rule along freshly sampled paths on [t, t+ε] with `steps`
/// steps per rung (same seed for every rung).
std::vector<ConditionalLebesgueRow> conditional_lebesgue_check(const ProcessFn& f, double t,
                                                               std::span<const double> epsilons,
                                                               std::size_t d, std::size_t n_paths,
                                                               std::size_t steps,
                                                               std::uint64_t seed);

/// Same quadrature on an existing batch (ε is the batch window).
ConditionalLebesgueRow conditional_lebesgue_on_batch(const ProcessFn& f, const PathBatch& batch);

// ---- L¹ from a.s. convergence --------------------------------------------

/// Draws one (X_n, X) pair on a common probability space.
using CoupledSampler = std::function<std::pair<double, double>(std::size_t n, std::mt19937_64& rng)>;

struct L1Row {
    std::size_t n = 0;
    double mean_abs = 0.0;  // E|X_n - X|
    double se = 0.0;
    double second_moment = 0.0;  // E[X_n²]
};

std::vector<L1Row> l1_from_as_check(const CoupledSampler& sampler, std::span<const std::size_t> ns,
                                    std::size_t samples, std::uint64_t seed);

}  // namespace bsderep
