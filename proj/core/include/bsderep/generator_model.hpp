#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace bsderep {

/// State of one Brownian path at one time, as seen by generators and
/// growth processes. `base` is B_{t0} (the frozen prefix, zero when t0 = 0)
/// and `displacement` is B_s - B_{t0}; both have the path dimension.
struct PathContext {
    double time = 0.0;
    std::span<const double> base;
    std::span<const double> displacement;

    double brownian(std::size_t i) const {
        return (base.empty() ? 0.0 : base[i]) + displacement[i];
    }
    double brownian_norm() const;
    double displacement_norm() const;
    std::size_t dimension() const { return displacement.size(); }
};

using DriverFn = std::function<double(const PathContext&, double y, std::span<const double> z)>;
using ProcessFn = std::function<double(const PathContext&)>;
using DominatorFn = std::function<double(const PathContext&, double x)>;
using GrowthFn = std::function<double(double)>;

/// The φ_t(ω, x) family bounding |g| in y, together with the integrability
/// properties the user asserts for it.
struct StochasticDominator {
    DominatorFn eval;
    bool square_integrable_declared = true;
    bool hinf_declared = true;
    bool path_dependent = false;

    double operator()(const PathContext& ctx, double x) const { return eval(ctx, x); }
};

/// A nonnegative process with a declared bound on ‖∫₀ᵀ p_r dr‖_∞.
struct BoundedProcess {
    ProcessFn eval;
    double integral_bound = 0.0;

    double operator()(const PathContext& ctx) const { return eval(ctx); }
};

/// Generator g(ω, t, y, z) with its growth data.
///
/// (H1)  sgn(y) g ≤ f_t + u_t |y| + γ |z|²
/// (H2)  |g| ≤ φ_t(|y|) + h(|y|) |z|²
/// (H3)  g continuous in (y, z)
struct GeneratorSpec {
    std::string name;
    DriverFn eval;
    double gamma = 1.0;
    GrowthFn h;
    StochasticDominator phi;
    BoundedProcess u;
    BoundedProcess f;
    double horizon = std::numeric_limits<double>::infinity();
    bool continuity_declared = true;
    /// True when g depends on ω through the path context (not only on t).
    bool path_dependent = false;

    double operator()(const PathContext& ctx, double y, std::span<const double> z) const {
        return eval(ctx, y, z);
    }

    /// Throws ParameterError when γ ≤ 0, a declared bound is negative or
    /// non-finite, a callable is missing, or the horizon is not positive.
    void validate() const;
};

enum class Assumption { H1, H2, H3 };
const char* to_string(Assumption a);

/// One sampled point of the generator domain.
struct DomainSample {
    double t = 0.0;
    std::vector<double> base;  // B_t at the sample
    double y = 0.0;
    std::vector<double> z;

    PathContext context() const;
};

/// Deterministic scan followed by seeded uniform draws over
/// t ∈ [0, t_max], y ∈ [-y_max, y_max], z ∈ [-z_max, z_max]^d, B_t ~ N(0, t).
struct DomainSampler {
    double y_max = 10.0;
    double z_max = 5.0;
    double t_max = 1.0;
    std::uint64_t seed = 0x5eed5eedULL;

    /// The first samples are the grid y ∈ {-y_max, ..., y_max} (step 0.5)
    /// crossed with z ∈ {0, ±0.5, ±1, ±2, ±z_max}·(1,...,1)/√d at t = 0.
    std::vector<DomainSample> draw(std::size_t n, std::size_t d) const;
};

struct ComplianceViolation {
    double t = 0.0;
    double y = 0.0;
    std::vector<double> z;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string kind;
};

struct ComplianceReport {
    Assumption assumption = Assumption::H1;
    std::size_t n_samples = 0;
    std::vector<ComplianceViolation> violations;

    /// A pass only means no counterexample was found at the sampled points.
    bool passed() const { return violations.empty(); }
    const char* verdict() const { return passed() ? "pass-at-sampled-points" : "violated"; }
};

ComplianceReport check_h1(const GeneratorSpec& spec, const DomainSampler& sampler, std::size_t n,
                          std::size_t d);
ComplianceReport check_h2(const GeneratorSpec& spec, const DomainSampler& sampler, std::size_t n,
                          std::size_t d);
/// Falsifies continuity along the dyadic ladder δ = 2⁻¹, ..., 2⁻³⁰: a sample is
/// flagged when |g(y+δ, z+δe) - g(y-δ, z-δe)| is still above modulus_tolerance
/// at the finest δ.
ComplianceReport check_h3(const GeneratorSpec& spec, const DomainSampler& sampler, std::size_t n,
                          std::size_t d, double modulus_tolerance);

/// q_k(ỹ) = kỹ / (|ỹ| ∨ k), with q_0 ≡ 0.
double truncate_qk(double y_tilde, double k);

double euclidean_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

/// Constants and the A(s) process bounding the recentred generator.
struct GrowthEnvelope {
    double K = 0.0;
    double k = 0.0;
    double B = 0.0;
    double C = 0.0;
    double z_norm = 0.0;
    double h_at_K = 0.0;
    StochasticDominator phi;

    /// φ_s(K) at the given path state.
    double phi_at_K(const PathContext& ctx) const { return phi(ctx, K); }
    /// A(s) = 1{s<τ} φ_s(K) + 2h(K)|z|².
    double A(const PathContext& ctx, bool before_tau) const {
        return (before_tau ? phi_at_K(ctx) : 0.0) + 2.0 * h_at_K * z_norm * z_norm;
    }
};

/// K = 3(|y|+|z|+‖∫f‖)e^{‖∫u‖}, k = (2/3)K, B = 2h(K), C = √(2+8h(K)²|z|²).
GrowthEnvelope derive_envelope(const GeneratorSpec& spec, double y, std::span<const double> z);

/// g̃(s, ỹ, z̃) = 1{s<τ} g(s, q_k(ỹ) + y + ⟨z, B_{s∧τ} - B_t⟩, z̃ + z).
///
/// The caller passes the path context whose displacement is already frozen
/// at τ, together with the indicator 1{s<τ}.
class TransformedGenerator {
public:
    TransformedGenerator(GeneratorSpec spec, double y, std::vector<double> z, GrowthEnvelope envelope);

    double operator()(const PathContext& ctx, bool before_tau, double y_tilde,
                      std::span<const double> z_tilde) const;

    const GrowthEnvelope& envelope() const { return envelope_; }
    double y() const { return y_; }
    std::span<const double> z() const { return z_; }

private:
    GeneratorSpec spec_;
    double y_;
    std::vector<double> z_;
    GrowthEnvelope envelope_;
};

TransformedGenerator build_transformed_generator(const GeneratorSpec& spec, double y,
                                                 std::span<const double> z,
                                                 const GrowthEnvelope& envelope);

using PlaneFn = std::function<double(double y, std::span<const double> z)>;

/// Grid-search supremum of |f| over {(ȳ, z̄) : |ȳ| + |z̄|² ≤ radius}.
///
/// The (|ȳ|, |z̄|²) triangle is scanned with step radius/10 in each
/// coordinate, both signs of ȳ, and 32 directions for z̄ (2 in d = 1, a
/// circle in d = 2, a spherical Fibonacci set otherwise).
struct BallSup {
    double value = 0.0;
    double grid_step = 0.0;
    std::size_t evaluations = 0;
};
BallSup ball_sup(const PlaneFn& f, double radius, std::size_t d);

struct Lemma25Sample {
    double y = 0.0;
    std::vector<double> z;
};

struct Lemma25Result {
    std::size_t n_checked = 0;
    std::vector<ComplianceViolation> violations;
    /// Samples inside the ball whose |f| exceeds the grid supremum: the grid
    /// missed the true sup there, which is reported rather than counted.
    std::size_t under_resolution = 0;
    double grid_step = 0.0;
    double ball_sup = 0.0;

    bool passed() const { return violations.empty(); }
};

/// Checks |f(y,z)| ≤ (n+B)(|y|+|z|²) + sup_{|ȳ|+|z̄|² ≤ A/n} |f(ȳ,z̄)| at every sample.
Lemma25Result lemma25_envelope(double A, double B, unsigned n, const PlaneFn& f,
                               std::span<const Lemma25Sample> samples);

}  // namespace bsderep
