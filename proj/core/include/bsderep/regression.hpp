#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bsderep {

/// Exponents of all monomials of total degree ≤ degree in d variables,
/// ordered by degree then lexicographically. The constant comes first.
std::vector<std::vector<unsigned>> monomial_exponents(std::size_t d, unsigned degree);

/// Least-squares projection onto a polynomial basis in a scaled state.
///
/// The design matrix is formed once per node; several right-hand sides can
/// then be projected against the same factorisation.
class PolynomialRegression {
public:
    /// `states` holds n rows of d coordinates; rows are multiplied by `scale`
    /// before the monomials are formed.
    PolynomialRegression(std::span<const double> states, std::size_t n, std::size_t d,
                         unsigned degree, double scale, unsigned jobs = 1);
    ~PolynomialRegression();
    PolynomialRegression(PolynomialRegression&&) noexcept;
    PolynomialRegression& operator=(PolynomialRegression&&) noexcept;

    std::size_t size() const { return n_; }
    std::size_t basis_size() const { return p_; }
    unsigned degree() const { return degree_; }
    /// √(λ_max/λ_min) of the Gram matrix, i.e. cond₂ of the design matrix.
    double condition_number() const { return condition_; }

    /// Coefficients minimising Σ (target_i - ⟨β, φ(x_i)⟩)².
    std::vector<double> fit(std::span<const double> target) const;
    /// Fitted values at the regression points.
    std::vector<double> fitted(std::span<const double> target) const;
    /// ⟨β, φ(x_i)⟩ at regression point i.
    double evaluate_row(std::size_t i, std::span<const double> beta) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    unsigned degree_ = 0;
    double condition_ = 1.0;
};

/// Condition number above which a design matrix is treated as singular.
inline constexpr double kSingularCondition = 1e10;

}  // namespace bsderep
