#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bsderep/errors.hpp"
#include "bsderep/regression.hpp"

using namespace bsderep;

TEST(Monomials, CountIsBinomial) {
    // C(d + p, p)
    EXPECT_EQ(monomial_exponents(1, 2).size(), 3u);
    EXPECT_EQ(monomial_exponents(3, 2).size(), 10u);
    EXPECT_EQ(monomial_exponents(2, 3).size(), 10u);
    EXPECT_EQ(monomial_exponents(4, 0).size(), 1u);
}

TEST(Regression, RecoversQuadraticExactly) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    const std::size_t n = 5000;
    std::vector<double> x(2 * n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[2 * i] = n01(rng);
        x[2 * i + 1] = n01(rng);
        y[i] = 1.0 + 2.0 * x[2 * i] - x[2 * i + 1] + 0.5 * x[2 * i] * x[2 * i + 1];
    }
    PolynomialRegression reg(x, n, 2, 2, 1.0, 2);
    const auto fit = reg.fitted(y);
    for (std::size_t i = 0; i < n; i += 101) EXPECT_NEAR(fit[i], y[i], 1e-10);
    EXPECT_LT(reg.condition_number(), 100.0);
}

TEST(Regression, InterceptPreservesMean) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    const std::size_t n = 3000;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = n01(rng);
        y[i] = std::sin(3.0 * x[i]) + n01(rng);
    }
    PolynomialRegression reg(x, n, 1, 3, 1.0, 1);
    const auto fit = reg.fitted(y);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a += y[i];
        b += fit[i];
    }
    EXPECT_NEAR(a, b, 1e-9);
}

TEST(Regression, SingularDesignThrows) {
    std::vector<double> x(100, 0.5);
    EXPECT_THROW(PolynomialRegression(x, 100, 1, 2, 1.0, 1), SingularRegressionError);
    EXPECT_THROW(PolynomialRegression(x, 2, 1, 2, 1.0, 1), ParameterError);
}
