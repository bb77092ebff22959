#include "bsderep/regression.hpp"

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <cmath>
#include <sstream>

#include "bsderep/errors.hpp"
#include "bsderep/parallel.hpp"

namespace bsderep {

std::vector<std::vector<unsigned>> monomial_exponents(std::size_t d, unsigned degree) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> e(d, 0);
    for (unsigned total = 0; total <= degree; ++total) {
        // all exponent vectors with sum == total, lexicographically descending
        std::function<void(std::size_t, unsigned)> rec = [&](std::size_t k, unsigned left) {
            if (k + 1 == d) {
                e[k] = left;
                out.push_back(e);
                return;
            }
            for (unsigned v = left + 1; v-- > 0;) {
                e[k] = v;
                rec(k + 1, left - v);
            }
        };
        rec(0, total);
    }
    return out;
}

struct PolynomialRegression::Impl {
    std::vector<double> basis;  // n × p, row-major
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    unsigned jobs = 1;
};

PolynomialRegression::PolynomialRegression(std::span<const double> states, std::size_t n, std::size_t d,
                                           unsigned degree, double scale, unsigned jobs)
    : impl_(std::make_unique<Impl>()), n_(n), degree_(degree) {
    if (n == 0 || d == 0) throw ParameterError("regression needs at least one point and dimension");
    if (states.size() != n * d) throw ParameterError("regression states have the wrong size");
    const auto exps = monomial_exponents(d, degree);
    p_ = exps.size();
    if (n < p_) throw ParameterError("fewer regression points than basis functions");
    impl_->jobs = jobs ? jobs : 1;

    auto& phi = impl_->basis;
    phi.resize(n * p_);
    const std::size_t chunks = chunk_count(n);
    std::vector<Eigen::MatrixXd> partial(chunks, Eigen::MatrixXd::Zero(p_, p_));
    parallel_chunks(n, impl_->jobs, [&](std::size_t c, std::size_t b, std::size_t e) {
        std::vector<double> x(d);
        auto& G = partial[c];
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t k = 0; k < d; ++k) x[k] = states[i * d + k] * scale;
            double* row = phi.data() + i * p_;
            for (std::size_t m = 0; m < p_; ++m) {
                double v = 1.0;
                for (std::size_t k = 0; k < d; ++k) {
                    for (unsigned r = 0; r < exps[m][k]; ++r) v *= x[k];
                }
                row[m] = v;
            }
            for (std::size_t a = 0; a < p_; ++a) {
                for (std::size_t bb = a; bb < p_; ++bb) G(a, bb) += row[a] * row[bb];
            }
        }
    });
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p_, p_);
    for (const auto& G : partial) gram += G;
    gram = gram.selfadjointView<Eigen::Upper>();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    condition_ = lmin > 0.0 ? std::sqrt(lmax / lmin) : std::numeric_limits<double>::infinity();
    if (!(condition_ <= kSingularCondition)) {
        std::ostringstream os;
        os << "regression design matrix is numerically singular (condition number " << condition_
           << ", basis size " << p_ << ", points " << n << ")";
        throw SingularRegressionError(os.str(), condition_);
    }
    impl_->ldlt.compute(gram);
}

PolynomialRegression::~PolynomialRegression() = default;
PolynomialRegression::PolynomialRegression(PolynomialRegression&&) noexcept = default;
PolynomialRegression& PolynomialRegression::operator=(PolynomialRegression&&) noexcept = default;

std::vector<double> PolynomialRegression::fit(std::span<const double> target) const {
    if (target.size() != n_) throw ParameterError("regression target has the wrong size");
    const std::size_t chunks = chunk_count(n_);
    std::vector<Eigen::VectorXd> partial(chunks, Eigen::VectorXd::Zero(p_));
    const auto& phi = impl_->basis;
    parallel_chunks(n_, impl_->jobs, [&](std::size_t c, std::size_t b, std::size_t e) {
        auto& r = partial[c];
        for (std::size_t i = b; i < e; ++i) {
            const double* row = phi.data() + i * p_;
            for (std::size_t m = 0; m < p_; ++m) r[m] += row[m] * target[i];
        }
    });
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p_);
    for (const auto& r : partial) rhs += r;
    Eigen::VectorXd beta = impl_->ldlt.solve(rhs);
    return {beta.data(), beta.data() + p_};
}

std::vector<double> PolynomialRegression::fitted(std::span<const double> target) const {
    const auto beta = fit(target);
    std::vector<double> out(n_);
    parallel_chunks(n_, impl_->jobs, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = evaluate_row(i, beta);
    });
    return out;
}

double PolynomialRegression::evaluate_row(std::size_t i, std::span<const double> beta) const {
    const double* row = impl_->basis.data() + i * p_;
    double acc = 0.0;
    for (std::size_t m = 0; m < p_; ++m) acc += row[m] * beta[m];
    return acc;
}

}  // namespace bsderep
