#include <gtest/gtest.h>

#include <cmath>

#include "bsderep/errors.hpp"
#include "bsderep/families.hpp"

using namespace bsderep;

TEST(Families, CubicDampedConstant) {
    // root of cos y = 3y² at y* = 0.5354282441646569; sin y* - y*³
    EXPECT_NEAR(cubic_damped_h1_constant(), 0.35671100570481260, 1e-12);
}

TEST(Families, Values) {
    const std::vector<double> z{0.5};
    const PathContext ctx{0.0, {}, std::span<const double>(z.data(), 1)};
    EXPECT_DOUBLE_EQ(pure_quadratic_generator(0.5)(ctx, 3.0, z), 0.125);
    EXPECT_DOUBLE_EQ(linear_generator(2.0, {1.0}, 1.0)(ctx, 3.0, z), 7.5);
    EXPECT_NEAR(cubic_damped_generator(0.5)(ctx, 0.1, z), -0.001 + std::sin(0.1) + 0.125, 1e-15);
    EXPECT_NEAR(oscillatory_generator(1.0, 0.5)(ctx, 0.1, z), std::sin(0.1) + std::cos(0.5) + 0.125, 1e-15);
    EXPECT_DOUBLE_EQ(y_squared_generator()(ctx, 3.0, z), 9.0);
}

TEST(Families, StochasticCoefficientReadsThePath) {
    const std::vector<double> base{0.3}, disp{0.4}, z{0.0};
    const auto g = stochastic_coefficient_generator(0.5);
    EXPECT_NEAR(g(PathContext{0.5, base, disp}, 0.0, z), 0.7, 1e-15);
    const std::vector<double> far{5.0};
    EXPECT_NEAR(g(PathContext{0.5, base, far}, 0.0, z), 1.0, 1e-15);
    EXPECT_TRUE(g.path_dependent);
}

TEST(Families, MakeGenerator) {
    FamilyParams p;
    p.scalars["gamma"] = 0.25;
    EXPECT_EQ(make_generator("pure-quadratic", p, 2).gamma, 0.25);
    EXPECT_TRUE(std::isinf(make_generator("pure-quadratic", p, 2).horizon));
    p.horizon = 0.5;
    EXPECT_EQ(make_generator("cubic-damped", p, 1).horizon, 0.5);
    p.scalars["bogus"] = 1.0;
    EXPECT_THROW(make_generator("cubic-damped", p, 1), ParameterError);
    EXPECT_THROW(make_generator("no-such-family", {}, 1), ParameterError);
    FamilyParams lb;
    lb.b = {1.0, 2.0};
    EXPECT_THROW(make_generator("linear", lb, 3), ParameterError);
    EXPECT_FALSE(make_generator("sign", {}, 1).continuity_declared);
    for (const auto& name : builtin_families()) EXPECT_NO_THROW(make_generator(name, {}, 2)) << name;
}

TEST(Families, ValidateRejectsBadGrowthData) {
    auto s = pure_quadratic_generator(0.5);
    s.gamma = 0.0;
    EXPECT_THROW(s.validate(), ParameterError);
    s = pure_quadratic_generator(0.5);
    s.f.integral_bound = -1.0;
    EXPECT_THROW(s.validate(), ParameterError);
}
