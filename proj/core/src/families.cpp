#include "bsderep/families.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "bsderep/errors.hpp"

namespace bsderep {

namespace {

BoundedProcess constant_process(double value, double horizon) {
    const double bound = value == 0.0 ? 0.0 : value * horizon;
    return {[value](const PathContext&) { return value; }, bound};
}

StochasticDominator deterministic_phi(std::function<double(double)> fn) {
    return {[fn = std::move(fn)](const PathContext&, double x) { return fn(x); }, true, true, false};
}

GrowthFn constant_h(double value) {
    return [value](double) { return value; };
}

double sq(std::span<const double> z) {
    double acc = 0.0;
    for (double v : z) acc += v * v;
    return acc;
}

double finite_horizon(double horizon, const char* family) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ParameterError(std::string(family) + " needs a finite positive horizon");
    }
    return horizon;
}

}  // namespace

double cubic_damped_h1_constant() {
    // stationary point of sin y - y³ on [0, 1]: cos y = 3y²
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::cos(mid) - 3.0 * mid * mid > 0.0 ? lo : hi) = mid;
    }
    const double y = 0.5 * (lo + hi);
    return std::sin(y) - y * y * y;
}

GeneratorSpec linear_generator(double a, std::vector<double> b, double c, double horizon) {
    finite_horizon(horizon, "linear");
    const double bn = euclidean_norm(b);
    GeneratorSpec s;
    s.name = "linear";
    s.eval = [a, b, c](const PathContext&, double y, std::span<const double> z) {
        double acc = a * y + c;
        for (std::size_t i = 0; i < b.size() && i < z.size(); ++i) acc += b[i] * z[i];
        return acc;
    };
    s.gamma = bn > 0.0 ? 0.5 * bn : 1.0;
    s.h = constant_h(0.5 * bn);
    const double f0 = std::abs(c) + 0.5 * bn;
    s.phi = deterministic_phi([f0, a](double x) { return f0 + std::abs(a) * x; });
    s.f = constant_process(f0, horizon);
    s.u = constant_process(std::abs(a), horizon);
    s.horizon = horizon;
    return s;
}

GeneratorSpec pure_quadratic_generator(double gamma, double horizon) {
    if (!(gamma > 0.0)) throw ParameterError("pure-quadratic needs gamma > 0");
    GeneratorSpec s;
    s.name = "pure-quadratic";
    s.eval = [gamma](const PathContext&, double, std::span<const double> z) { return gamma * sq(z); };
    s.gamma = gamma;
    s.h = constant_h(gamma);
    s.phi = deterministic_phi([](double) { return 0.0; });
    s.f = constant_process(0.0, horizon);
    s.u = constant_process(0.0, horizon);
    s.horizon = horizon;
    return s;
}

GeneratorSpec cubic_damped_generator(double gamma, double horizon) {
    if (!(gamma > 0.0)) throw ParameterError("cubic-damped needs gamma > 0");
    finite_horizon(horizon, "cubic-damped");
    const double cstar = cubic_damped_h1_constant();
    const double lead = 1.0 + 1.0 / (std::numbers::pi * std::numbers::pi * std::numbers::pi);
    GeneratorSpec s;
    s.name = "cubic-damped";
    s.eval = [gamma](const PathContext&, double y, std::span<const double> z) {
        return -y * y * y + std::sin(y) + gamma * sq(z);
    };
    s.gamma = gamma;
    s.h = constant_h(gamma);
    s.phi = deterministic_phi([cstar, lead](double x) { return cstar + lead * x * x * x; });
    s.f = constant_process(cstar, horizon);
    s.u = constant_process(0.0, horizon);
    s.horizon = horizon;
    return s;
}

GeneratorSpec oscillatory_generator(double amp, double gamma, double horizon) {
    if (!(gamma > 0.0)) throw ParameterError("oscillatory needs gamma > 0");
    finite_horizon(horizon, "oscillatory");
    const double m = std::abs(amp);
    GeneratorSpec s;
    s.name = "oscillatory";
    s.eval = [amp, gamma](const PathContext&, double y, std::span<const double> z) {
        return amp * (std::sin(y) + std::cos(z[0])) + gamma * sq(z);
    };
    s.gamma = gamma;
    s.h = constant_h(gamma);
    s.phi = deterministic_phi([m](double x) { return m * (1.0 + std::min(x, 1.0)); });
    s.f = constant_process(2.0 * m, horizon);
    s.u = constant_process(0.0, horizon);
    s.horizon = horizon;
    return s;
}

GeneratorSpec stochastic_coefficient_generator(double gamma, double horizon) {
    if (!(gamma > 0.0)) throw ParameterError("stochastic-coefficient needs gamma > 0");
    finite_horizon(horizon, "stochastic-coefficient");
    auto coef = [](const PathContext& ctx) { return std::min(ctx.brownian_norm(), 1.0); };
    GeneratorSpec s;
    s.name = "stochastic-coefficient";
    s.eval = [gamma, coef](const PathContext& ctx, double y, std::span<const double> z) {
        return coef(ctx) - y + gamma * sq(z);
    };
    s.gamma = gamma;
    s.h = constant_h(gamma);
    s.phi = {[coef](const PathContext& ctx, double x) { return coef(ctx) + x; }, true, true, true};
    s.f = {coef, horizon};
    s.u = constant_process(0.0, horizon);
    s.path_dependent = true;
    s.horizon = horizon;
    return s;
}

GeneratorSpec y_squared_generator(double horizon) {
    GeneratorSpec s;
    s.name = "y-squared";
    s.eval = [](const PathContext&, double y, std::span<const double>) { return y * y; };
    s.gamma = 1.0;
    s.h = constant_h(0.0);
    s.phi = deterministic_phi([](double x) { return x * x; });
    s.f = constant_process(1.0, horizon);
    s.u = constant_process(1.0, horizon);
    s.horizon = horizon;
    return s;
}

GeneratorSpec sign_generator(double horizon) {
    GeneratorSpec s;
    s.name = "sign";
    s.eval = [](const PathContext&, double y, std::span<const double>) {
        return y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
    };
    s.gamma = 1.0;
    s.h = constant_h(0.0);
    s.phi = deterministic_phi([](double) { return 1.0; });
    s.f = constant_process(1.0, horizon);
    s.u = constant_process(0.0, horizon);
    s.continuity_declared = false;
    s.horizon = horizon;
    return s;
}

namespace {

double take(const FamilyParams& p, const std::string& key, double fallback) {
    auto it = p.scalars.find(key);
    return it == p.scalars.end() ? fallback : it->second;
}

void allow_only(const std::string& family, const FamilyParams& p, std::set<std::string> keys,
                bool allows_b) {
    for (const auto& [key, value] : p.scalars) {
        if (!keys.count(key)) throw ParameterError("family '" + family + "' has no parameter '" + key + "'");
        if (!std::isfinite(value)) throw ParameterError("parameter '" + key + "' must be finite");
    }
    if (!allows_b && !p.b.empty()) throw ParameterError("family '" + family + "' takes no vector b");
}

}  // namespace

GeneratorSpec make_generator(const std::string& family, const FamilyParams& p, std::size_t d) {
    if (d == 0) throw ParameterError("dimension must be positive");
    const bool has_T = !std::isnan(p.horizon);
    auto horizon = [&](double fallback) { return has_T ? p.horizon : fallback; };
    GeneratorSpec s;
    if (family == "linear") {
        allow_only(family, p, {"a", "c"}, true);
        std::vector<double> b = p.b.empty() ? std::vector<double>(d, 0.0) : p.b;
        if (b.size() != d) throw ParameterError("linear: b must have the dimension of z");
        s = linear_generator(take(p, "a", 0.0), b, take(p, "c", 0.0), horizon(1.0));
    } else if (family == "zero") {
        allow_only(family, p, {}, false);
        s = linear_generator(0.0, std::vector<double>(d, 0.0), 0.0, horizon(1.0));
        s.name = "zero";
    } else if (family == "constant") {
        allow_only(family, p, {"c"}, false);
        s = linear_generator(0.0, std::vector<double>(d, 0.0), take(p, "c", 1.0), horizon(1.0));
        s.name = "constant";
    } else if (family == "pure-quadratic") {
        allow_only(family, p, {"gamma"}, false);
        s = pure_quadratic_generator(take(p, "gamma", 0.5), horizon(std::numeric_limits<double>::infinity()));
    } else if (family == "cubic-damped") {
        allow_only(family, p, {"gamma"}, false);
        s = cubic_damped_generator(take(p, "gamma", 0.5), horizon(1.0));
    } else if (family == "oscillatory") {
        allow_only(family, p, {"amp", "gamma"}, false);
        s = oscillatory_generator(take(p, "amp", 1.0), take(p, "gamma", 0.5), horizon(1.0));
    } else if (family == "stochastic-coefficient") {
        allow_only(family, p, {"gamma"}, false);
        s = stochastic_coefficient_generator(take(p, "gamma", 0.5), horizon(1.0));
    } else if (family == "y-squared") {
        allow_only(family, p, {}, false);
        s = y_squared_generator(horizon(1.0));
    } else if (family == "sign") {
        allow_only(family, p, {}, false);
        s = sign_generator(horizon(1.0));
    } else {
        throw ParameterError("unknown generator family '" + family + "'");
    }
    s.validate();
    return s;
}

std::vector<std::string> builtin_families() {
    return {"linear",      "zero", "constant", "pure-quadratic", "cubic-damped",
            "oscillatory", "stochastic-coefficient", "y-squared", "sign"};
}

}  // namespace bsderep
