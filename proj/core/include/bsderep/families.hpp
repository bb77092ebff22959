#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "bsderep/generator_model.hpp"

namespace bsderep {

/// max_{y ≥ 0} (sin y - y³), the constant bounding sgn(y)(sin y - y³).
double cubic_damped_h1_constant();

// Built-in generator families. Each carries growth data that is valid for
// (H1)-(H2) by construction; families with a nonzero f or u need a finite
// horizon so that ‖∫₀ᵀ f‖ and ‖∫₀ᵀ u‖ are finite.

/// g = a·y + ⟨b, z⟩ + c  (φ(x) = |c| + |b|/2 + |a|x, h ≡ |b|/2).
GeneratorSpec linear_generator(double a, std::vector<double> b, double c, double horizon = 1.0);

/// g = γ|z|²  (f = u = 0, φ ≡ 0, h ≡ γ).
GeneratorSpec pure_quadratic_generator(double gamma,
                                       double horizon = std::numeric_limits<double>::infinity());

/// g = -y³ + sin y + γ|z|²  (f ≡ c*, φ(x) = c* + (1+π⁻³)x³, h ≡ γ).
GeneratorSpec cubic_damped_generator(double gamma, double horizon = 1.0);

/// g = amp·(sin y + cos z₁) + γ|z|²  (f ≡ 2|amp|, φ(x) = |amp|(1 + x∧1), h ≡ γ).
GeneratorSpec oscillatory_generator(double amp, double gamma, double horizon = 1.0);

/// g = (|B_t| ∧ 1) - y + γ|z|²  (f_t = |B_t| ∧ 1, φ_t(x) = (|B_t| ∧ 1) + x, h ≡ γ).
GeneratorSpec stochastic_coefficient_generator(double gamma, double horizon = 1.0);

/// Negative control for (H1): g = y² declared with f ≡ 1, u ≡ 1, γ = 1.
GeneratorSpec y_squared_generator(double horizon = 1.0);

/// Negative control for (H3): g = sgn(y).
GeneratorSpec sign_generator(double horizon = 1.0);

/// Parameters of a named family as read from an experiment config.
struct FamilyParams {
    std::map<std::string, double> scalars;
    std::vector<double> b;
    double horizon = std::numeric_limits<double>::quiet_NaN();  // NaN: family default
};

/// Builds "linear", "pure-quadratic", "cubic-damped", "oscillatory",
/// "stochastic-coefficient", "y-squared", "sign", "zero" or "constant".
/// Throws ParameterError for unknown families or parameters.
GeneratorSpec make_generator(const std::string& family, const FamilyParams& params, std::size_t d);

std::vector<std::string> builtin_families();

}  // namespace bsderep
