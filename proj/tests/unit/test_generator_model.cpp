#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bsderep/errors.hpp"
#include "bsderep/families.hpp"
#include "bsderep/generator_model.hpp"

using namespace bsderep;

namespace {
const std::vector<double> kZero1{0.0};
PathContext at(double t, std::span<const double> disp) { return PathContext{t, {}, disp}; }
}  // namespace

TEST(TruncateQk, ClipsToRadius) {
    EXPECT_DOUBLE_EQ(truncate_qk(0.5, 2.0), 0.5);
    EXPECT_DOUBLE_EQ(truncate_qk(-5.0, 2.0), -2.0);
    EXPECT_DOUBLE_EQ(truncate_qk(7.0, 0.0), 0.0);
    EXPECT_THROW(truncate_qk(1.0, -1.0), ParameterError);
}

TEST(Envelope, PureQuadraticConstants) {
    // K = 3(|y|+|z|) = 9, k = 6, h ≡ γ: B = 2γ = 1, C = √(2 + 8·γ²·|z|²) = √10
    const auto spec = pure_quadratic_generator(0.5);
    const std::vector<double> z{2.0};
    const auto env = derive_envelope(spec, 1.0, z);
    EXPECT_DOUBLE_EQ(env.K, 9.0);
    EXPECT_DOUBLE_EQ(env.k, 6.0);
    EXPECT_DOUBLE_EQ(env.B, 1.0);
    EXPECT_NEAR(env.C, 3.1622776601683795, 1e-15);
    EXPECT_DOUBLE_EQ(env.phi_at_K(at(0.0, kZero1)), 0.0);
    EXPECT_DOUBLE_EQ(env.A(at(0.0, kZero1), true), 4.0);
}

TEST(Envelope, IntegralBoundsEnterK) {
    // stochastic-coefficient on T = 1: ‖∫f‖ = 1, u = 0, so K = 3(|y|+|z|+1)
    const auto spec = stochastic_coefficient_generator(0.5, 1.0);
    const std::vector<double> z{0.3, 0.4};
    const auto env = derive_envelope(spec, -0.5, z);
    EXPECT_NEAR(env.K, 3.0 * (0.5 + 0.5 + 1.0), 1e-14);
    EXPECT_NEAR(env.k, 2.0 * (0.5 + 0.5 + 1.0), 1e-14);
}

TEST(TransformedGenerator, ZeroAfterTau) {
    const auto spec = pure_quadratic_generator(0.5);
    const std::vector<double> z{2.0}, zt{0.0};
    const auto env = derive_envelope(spec, 1.0, z);
    const auto tg = build_transformed_generator(spec, 1.0, z, env);
    EXPECT_DOUBLE_EQ(tg(at(0.0, kZero1), true, 0.0, zt), 2.0);
    EXPECT_DOUBLE_EQ(tg(at(0.0, kZero1), false, 0.0, zt), 0.0);
}

TEST(TransformedGenerator, TruncatesYTilde) {
    // g = a·y: g̃(ỹ) = a(q_k(ỹ) + y) saturates at a(k + y)
    const auto spec = linear_generator(1.0, {0.0}, 0.0);
    const std::vector<double> z{0.0}, zt{0.0};
    const auto env = derive_envelope(spec, 0.0, z);
    const auto tg = build_transformed_generator(spec, 0.0, z, env);
    EXPECT_DOUBLE_EQ(tg(at(0.0, kZero1), true, 1e6, zt), env.k);
}

TEST(Compliance, ConformingFamiliesPass) {
    DomainSampler s;
    for (const auto* name : {"linear", "pure-quadratic", "cubic-damped", "oscillatory", "stochastic-coefficient"}) {
        FamilyParams p;
        const auto spec = make_generator(name, p, 2);
        EXPECT_TRUE(check_h1(spec, s, 2000, 2).passed()) << name;
        EXPECT_TRUE(check_h2(spec, s, 2000, 2).passed()) << name;
        EXPECT_TRUE(check_h3(spec, s, 500, 2, 1e-6).passed()) << name;
    }
}

TEST(Compliance, YSquaredFailsH1) {
    DomainSampler s;
    const auto r = check_h1(y_squared_generator(), s, 4000, 1);
    ASSERT_FALSE(r.passed());
    EXPECT_STREQ(r.verdict(), "violated");
    for (const auto& v : r.violations) EXPECT_GT(v.lhs, v.rhs);
}

TEST(Compliance, SignFailsH3) {
    DomainSampler s;
    EXPECT_FALSE(check_h3(sign_generator(), s, 4000, 1, 1e-6).passed());
}

TEST(Compliance, SamplerIsDeterministic) {
    DomainSampler s;
    const auto a = s.draw(50, 3), b = s.draw(50, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].y, b[i].y);
        EXPECT_EQ(a[i].z, b[i].z);
    }
}

TEST(BallSup, QuadraticFormMaxOnBoundary) {
    // f = |ȳ| + |z̄|² is maximal (= radius) on the boundary of the ball
    auto f = [](double y, std::span<const double> z) { return std::abs(y) + dot(z, z); };
    for (std::size_t d : {1, 2, 3}) {
        const auto s = ball_sup(f, 2.0, d);
        EXPECT_NEAR(s.value, 2.0, 1e-12) << d;
    }
}

TEST(Lemma25, AffineQuadraticHasNoViolations) {
    // |f| ≤ A + B(|y|+|z|²) by construction
    const double A = 1.5, B = 0.7;
    auto f = [&](double y, std::span<const double> z) { return A * std::cos(y) + B * (y + dot(z, z)); };
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::vector<Lemma25Sample> samples;
    for (int i = 0; i < 500; ++i) samples.push_back({4.0 * n01(rng), {2.0 * n01(rng), n01(rng)}});
    for (unsigned n : {1u, 3u, 10u}) {
        const auto r = lemma25_envelope(A, B, n, f, samples);
        EXPECT_TRUE(r.passed()) << n;
        EXPECT_EQ(r.n_checked, samples.size());
    }
}
