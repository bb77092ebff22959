#include "bsderep/generator_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "bsderep/errors.hpp"

namespace bsderep {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::string describe(const DomainSample& s) {
    std::ostringstream os;
    os << "t=" << s.t << " y=" << s.y << " z=(";
    for (std::size_t i = 0; i < s.z.size(); ++i) os << (i ? "," : "") << s.z[i];
    os << ")";
    return os.str();
}

double finite_or_throw(double v, const char* what, const DomainSample& s) {
    if (!std::isfinite(v)) {
        throw EvaluationError(std::string(what) + " is not finite at " + describe(s));
    }
    return v;
}

bool exceeds(double lhs, double rhs) { return lhs > rhs + 1e-12 * (1.0 + std::abs(rhs)); }

ComplianceViolation violation(const DomainSample& s, double lhs, double rhs, std::string kind) {
    return {s.t, s.y, s.z, lhs, rhs, std::move(kind)};
}

}  // namespace

double PathContext::brownian_norm() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < displacement.size(); ++i) acc += brownian(i) * brownian(i);
    return std::sqrt(acc);
}

double PathContext::displacement_norm() const { return euclidean_norm(displacement); }

void GeneratorSpec::validate() const {
    if (!eval) throw ParameterError("generator '" + name + "' has no evaluation function");
    if (!h || !phi.eval || !u.eval || !f.eval) {
        throw ParameterError("generator '" + name + "' is missing growth data");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ParameterError("generator '" + name + "': gamma must be positive and finite");
    }
    for (double bound : {u.integral_bound, f.integral_bound}) {
        if (!(bound >= 0.0) || !std::isfinite(bound)) {
            throw ParameterError("generator '" + name +
                                 "': declared integral bounds must be finite and nonnegative");
        }
    }
    if (!(horizon > 0.0)) throw ParameterError("generator '" + name + "': horizon must be positive");
}

const char* to_string(Assumption a) {
    switch (a) {
        case Assumption::H1: return "H1";
        case Assumption::H2: return "H2";
        case Assumption::H3: return "H3";
    }
    return "?";
}

PathContext DomainSample::context() const { return {t, {}, base}; }

std::vector<DomainSample> DomainSampler::draw(std::size_t n, std::size_t d) const {
    if (d == 0) throw ParameterError("sampler dimension must be positive");
    std::vector<DomainSample> out;
    out.reserve(n);
    const double unit = 1.0 / std::sqrt(static_cast<double>(d));
    const double z_levels[] = {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, z_max, -z_max};
    for (double y = -y_max; y <= y_max + 1e-12 && out.size() < n; y += 0.5) {
        for (double zl : z_levels) {
            if (out.size() >= n) break;
            out.push_back({0.0, std::vector<double>(d, 0.0), y, std::vector<double>(d, zl * unit)});
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uy(-y_max, y_max);
    std::uniform_real_distribution<double> uz(-z_max, z_max);
    std::uniform_real_distribution<double> ut(0.0, t_max);
    std::normal_distribution<double> normal;
    while (out.size() < n) {
        DomainSample s;
        s.t = ut(rng);
        s.base.resize(d);
        for (auto& b : s.base) b = normal(rng) * std::sqrt(s.t);
        s.y = uy(rng);
        s.z.resize(d);
        for (auto& z : s.z) z = uz(rng);
        out.push_back(std::move(s));
    }
    return out;
}

ComplianceReport check_h1(const GeneratorSpec& spec, const DomainSampler& sampler, std::size_t n,
                          std::size_t d) {
    if (n == 0) throw ParameterError("check_h1 needs at least one sample");
    ComplianceReport report{Assumption::H1, n, {}};
    for (const auto& s : sampler.draw(n, d)) {
        const auto ctx = s.context();
        const double g = finite_or_throw(spec(ctx, s.y, s.z), "generator", s);
        const double zz = euclidean_norm(s.z);
        const double lhs = sgn(s.y) * g;
        const double rhs = finite_or_throw(spec.f(ctx), "f", s) +
                           finite_or_throw(spec.u(ctx), "u", s) * std::abs(s.y) +
                           spec.gamma * zz * zz;
        if (exceeds(lhs, rhs)) report.violations.push_back(violation(s, lhs, rhs, "growth"));
    }
    return report;
}

ComplianceReport check_h2(const GeneratorSpec& spec, const DomainSampler& sampler, std::size_t n,
                          std::size_t d) {
    if (n == 0) throw ParameterError("check_h2 needs at least one sample");
    ComplianceReport report{Assumption::H2, n, {}};
    std::mt19937_64 rng(sampler.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> step(0.0, sampler.y_max);
    for (const auto& s : sampler.draw(n, d)) {
        const auto ctx = s.context();
        const double x = std::abs(s.y);
        const double g = finite_or_throw(spec(ctx, s.y, s.z), "generator", s);
        const double zz = euclidean_norm(s.z);
        const double phi = finite_or_throw(spec.phi(ctx, x), "phi", s);
        const double h = finite_or_throw(spec.h(x), "h", s);
        const double rhs = phi + h * zz * zz;
        if (exceeds(std::abs(g), rhs)) report.violations.push_back(violation(s, std::abs(g), rhs, "growth"));

        const double x2 = x + step(rng);
        const double phi2 = finite_or_throw(spec.phi(ctx, x2), "phi", s);
        if (exceeds(phi, phi2)) report.violations.push_back(violation(s, phi, phi2, "phi-monotone"));
        const double h2 = finite_or_throw(spec.h(x2), "h", s);
        if (exceeds(h, h2)) report.violations.push_back(violation(s, h, h2, "h-monotone"));
    }
    return report;
}

ComplianceReport check_h3(const GeneratorSpec& spec, const DomainSampler& sampler, std::size_t n,
                          std::size_t d, double modulus_tolerance) {
    if (n == 0) throw ParameterError("check_h3 needs at least one sample");
    if (!(modulus_tolerance > 0.0)) throw ParameterError("modulus_tolerance must be positive");
    ComplianceReport report{Assumption::H3, n, {}};
    const double unit = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<double> zp(d), zm(d);
    for (const auto& s : sampler.draw(n, d)) {
        const auto ctx = s.context();
        double gap = 0.0;
        for (int e = 1; e <= 30; ++e) {
            const double delta = std::ldexp(1.0, -e);
            for (std::size_t i = 0; i < d; ++i) {
                zp[i] = s.z[i] + delta * unit;
                zm[i] = s.z[i] - delta * unit;
            }
            const double gp = finite_or_throw(spec(ctx, s.y + delta, zp), "generator", s);
            const double gm = finite_or_throw(spec(ctx, s.y - delta, zm), "generator", s);
            gap = std::abs(gp - gm);
        }
        if (gap > modulus_tolerance) {
            report.violations.push_back(violation(s, gap, modulus_tolerance, "modulus"));
        }
    }
    return report;
}

double truncate_qk(double y_tilde, double k) {
    if (k < 0.0) throw ParameterError("truncation radius must be nonnegative");
    if (k == 0.0) return 0.0;
    return k * y_tilde / std::max(std::abs(y_tilde), k);
}

double euclidean_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

GrowthEnvelope derive_envelope(const GeneratorSpec& spec, double y, std::span<const double> z) {
    const double F = spec.f.integral_bound;
    const double U = spec.u.integral_bound;
    const double zn = euclidean_norm(z);
    if (!std::isfinite(y) || !std::isfinite(zn) || !std::isfinite(F) || !std::isfinite(U)) {
        throw ParameterError("envelope inputs must be finite");
    }
    const double base = (std::abs(y) + zn + F) * std::exp(U);
    GrowthEnvelope env;
    env.K = 3.0 * base;
    env.k = 2.0 * base;
    env.z_norm = zn;
    env.h_at_K = spec.h(env.K);
    env.B = 2.0 * env.h_at_K;
    env.C = std::sqrt(2.0 + 8.0 * env.h_at_K * env.h_at_K * zn * zn);
    env.phi = spec.phi;
    return env;
}

TransformedGenerator::TransformedGenerator(GeneratorSpec spec, double y, std::vector<double> z,
                                           GrowthEnvelope envelope)
    : spec_(std::move(spec)), y_(y), z_(std::move(z)), envelope_(std::move(envelope)) {}

double TransformedGenerator::operator()(const PathContext& ctx, bool before_tau, double y_tilde,
                                        std::span<const double> z_tilde) const {
    if (!before_tau) return 0.0;
    const double yy = truncate_qk(y_tilde, envelope_.k) + y_ + dot(z_, ctx.displacement);
    thread_local std::vector<double> zz;
    zz.resize(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) zz[i] = z_tilde[i] + z_[i];
    return spec_(ctx, yy, zz);
}

TransformedGenerator build_transformed_generator(const GeneratorSpec& spec, double y,
                                                 std::span<const double> z,
                                                 const GrowthEnvelope& envelope) {
    return TransformedGenerator(spec, y, {z.begin(), z.end()}, envelope);
}

namespace {

std::vector<std::vector<double>> directions(std::size_t d) {
    std::vector<std::vector<double>> dirs;
    if (d == 1) return {{1.0}, {-1.0}};
    constexpr int m = 32;
    for (int i = 0; i < m; ++i) {
        std::vector<double> v(d, 0.0);
        if (d == 2) {
            const double a = 2.0 * std::numbers::pi * i / m;
            v[0] = std::cos(a);
            v[1] = std::sin(a);
        } else {
            // spherical Fibonacci set in the first three coordinates
            const double zc = 1.0 - (2.0 * i + 1.0) / m;
            const double r = std::sqrt(1.0 - zc * zc);
            const double a = i * std::numbers::pi * (3.0 - std::sqrt(5.0));
            v[0] = r * std::cos(a);
            v[1] = r * std::sin(a);
            v[2] = zc;
        }
        dirs.push_back(std::move(v));
    }
    return dirs;
}

}  // namespace

BallSup ball_sup(const PlaneFn& f, double radius, std::size_t d) {
    if (!(radius >= 0.0)) throw ParameterError("ball radius must be nonnegative");
    BallSup out;
    std::vector<double> zero(d, 0.0);
    out.value = std::abs(f(0.0, zero));
    out.evaluations = 1;
    if (radius == 0.0) return out;
    out.grid_step = radius / 10.0;
    const auto dirs = directions(d);
    std::vector<double> zb(d);
    for (int ia = 0; ia <= 10; ++ia) {
        const double a = ia * out.grid_step;
        for (int ib = 0; ia + ib <= 10; ++ib) {
            const double zn = std::sqrt(ib * out.grid_step);
            for (double sign : {1.0, -1.0}) {
                if (ia == 0 && sign < 0.0) continue;
                for (const auto& dir : dirs) {
                    for (std::size_t i = 0; i < d; ++i) zb[i] = zn * dir[i];
                    out.value = std::max(out.value, std::abs(f(sign * a, zb)));
                    ++out.evaluations;
                    if (ib == 0) break;
                }
            }
        }
    }
    return out;
}

Lemma25Result lemma25_envelope(double A, double B, unsigned n, const PlaneFn& f,
                               std::span<const Lemma25Sample> samples) {
    if (n == 0) throw ParameterError("lemma25_envelope: n must be positive");
    if (!(A >= 0.0) || !(B >= 0.0)) throw ParameterError("lemma25_envelope: A and B must be nonnegative");
    Lemma25Result out;
    if (samples.empty()) return out;
    const std::size_t d = samples.front().z.size();
    const double radius = A / n;
    const auto sup = ball_sup(f, radius, d);
    out.grid_step = sup.grid_step;
    out.ball_sup = sup.value;
    for (const auto& s : samples) {
        const double zn = euclidean_norm(s.z);
        const double lhs = std::abs(f(s.y, s.z));
        const double size = std::abs(s.y) + zn * zn;
        const double rhs = (n + B) * size + sup.value;
        ++out.n_checked;
        if (!exceeds(lhs, rhs)) continue;
        if (size <= radius) {
            ++out.under_resolution;
        } else {
            out.violations.push_back({0.0, s.y, s.z, lhs, rhs, "lemma25"});
        }
    }
    return out;
}

}  // namespace bsderep
