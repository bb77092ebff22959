#include "bsderep/bsde_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "bsderep/errors.hpp"
#include "bsderep/parallel.hpp"
#include "bsderep/regression.hpp"

namespace bsderep {

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::PicardLsmc: return "picard-lsmc";
        case Scheme::NestedMc: return "nested-mc";
        case Scheme::Pde1d: return "pde-1d";
    }
    return "?";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "picard-lsmc") return Scheme::PicardLsmc;
    if (name == "nested-mc") return Scheme::NestedMc;
    if (name == "pde-1d") return Scheme::Pde1d;
    throw ParameterError("unknown scheme '" + name + "'");
}

void SolverConfig::validate() const {
    if (picard_iters < 1) throw ParameterError("picard_iters must be at least 1");
    if (basis_degree < 1) throw ParameterError("basis degree must be at least 1");
    if (!(tolerance > 0.0)) throw ParameterError("solver tolerance must be positive");
    if (z_cap && !(*z_cap > 0.0)) throw ParameterError("z_cap must be positive");
}

double BsdeSolution::max_abs_y() const {
    double m = 0.0;
    for (double v : Y) m = std::max(m, std::abs(v));
    return m;
}

double apriori_bound(double xi_sup, double f_bound, double u_bound) {
    for (double v : {xi_sup, f_bound, u_bound}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("a priori bound inputs must be finite and nonnegative");
    }
    return (xi_sup + f_bound) * std::exp(u_bound);
}

namespace {

constexpr unsigned kZPasses = 6;

double checked(double v, std::size_t path, std::size_t node) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "generator returned a non-finite value on path " << path << " at node " << node;
        throw EvaluationError(os.str());
    }
    return v;
}

}  // namespace

BsdeSolution solve(const DriverFn& driver, const StoppedTerminal& terminal, const PathBatch& batch,
                   const SolverConfig& config, double apriori) {
    config.validate();
    if (config.scheme != Scheme::PicardLsmc) {
        throw ParameterError(std::string("solve() runs picard-lsmc; use the dedicated backend for ") +
                             to_string(config.scheme));
    }
    const std::size_t n = batch.size();
    const std::size_t N = batch.grid().steps();
    const std::size_t d = batch.dimension();
    const double dt = batch.grid().delta();
    if (terminal.xi.size() != n || terminal.z.size() != d) {
        throw ParameterError("terminal value does not match the path batch");
    }
    const unsigned jobs = config.jobs ? config.jobs : default_jobs();

    BsdeSolution sol;
    sol.n_paths = n;
    sol.n_nodes = N + 1;
    sol.dimension = d;
    sol.Y.assign(n * (N + 1), 0.0);
    sol.Z.assign(n * (N + 1) * d, 0.0);
    sol.condition_numbers.assign(N, 1.0);
    sol.apriori_bound = apriori;
    std::vector<double> deltas(config.picard_iters, 0.0);
    unsigned iters_used = 0;
    std::size_t unconverged_nodes = 0, fallbacks = 0;

    for (std::size_t i = 0; i < n; ++i) sol.Y[i * (N + 1) + N] = terminal.xi[i];
    std::vector<double> zeta = terminal.xi;

    std::vector<std::size_t> idx;
    idx.reserve(n);
    for (std::size_t jj = N; jj-- > 0;) {
        const std::size_t j = jj;
        idx.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (batch.active(i, j)) {
                idx.push_back(i);
            } else {
                sol.Y[i * (N + 1) + j] = terminal.xi[i];
            }
        }
        const std::size_t na = idx.size();
        if (na == 0) continue;

        unsigned degree = j == 0 ? 0 : config.basis_degree;
        while (degree > 0 && na < 2 * monomial_exponents(d, degree).size()) {
            --degree;
            ++fallbacks;
        }
        std::vector<double> states(na * d), dB(na * d), y1(na);
        for (std::size_t a = 0; a < na; ++a) {
            const auto x = batch.displacement(idx[a], j);
            const auto inc = batch.increment(idx[a], j);
            std::copy(x.begin(), x.end(), states.begin() + a * d);
            std::copy(inc.begin(), inc.end(), dB.begin() + a * d);
            y1[a] = sol.Y[idx[a] * (N + 1) + j + 1];
        }
        const double scale = j == 0 ? 1.0 : 1.0 / std::sqrt(batch.grid().node(j) - batch.grid().t0());
        PolynomialRegression reg(states, na, d, degree, scale, jobs);
        sol.condition_numbers[j] = reg.condition_number();

        // Z_j = E_j[Y_{j+1} ΔB]/Δ with the martingale part ⟨z̄, ΔB⟩ taken out,
        // iterated until z̄ reproduces itself.
        std::vector<double> zbar(na * d, 0.0), c(na), w(na);
        double zscale = 1.0;
        for (unsigned pass = 0; pass < kZPasses; ++pass) {
            for (std::size_t a = 0; a < na; ++a) {
                double m = 0.0;
                for (std::size_t k = 0; k < d; ++k) m += zbar[a * d + k] * dB[a * d + k];
                c[a] = y1[a] - m;
            }
            const auto eyc = reg.fitted(c);
            double change = 0.0;
            std::vector<double> znew(na * d);
            for (std::size_t k = 0; k < d; ++k) {
                for (std::size_t a = 0; a < na; ++a) w[a] = (c[a] - eyc[a]) * dB[a * d + k] / dt;
                const auto corr = reg.fitted(w);
                for (std::size_t a = 0; a < na; ++a) {
                    znew[a * d + k] = zbar[a * d + k] + corr[a];
                    change = std::max(change, std::abs(corr[a]));
                }
            }
            zbar.swap(znew);
            if (pass == 0) {
                zscale = 1.0;
                for (double v : zbar) zscale = std::max(zscale, std::abs(v));
            } else if (change <= 1e-13 * zscale) {
                break;
            }
        }
        if (config.z_cap) {
            for (std::size_t a = 0; a < na; ++a) {
                std::span<double> za(zbar.data() + a * d, d);
                const double norm = euclidean_norm(za);
                if (norm > *config.z_cap) {
                    for (auto& v : za) v *= *config.z_cap / norm;
                    ++sol.z_cap_hits;
                }
            }
        }
        for (std::size_t a = 0; a < na; ++a) {
            std::copy_n(zbar.begin() + a * d, d, sol.Z.begin() + (idx[a] * (N + 1) + j) * d);
            double m = 0.0;
            for (std::size_t k = 0; k < d; ++k) m += zbar[a * d + k] * dB[a * d + k];
            c[a] = y1[a] - m;
        }
        // z̄ is known at s_j, so E_j[Y_{j+1}] = E_j[Y_{j+1} - <z̄, ΔB>].
        const auto ey = reg.fitted(c);

        // Y_j = E_j[Y_{j+1}] + Δ g(s_j, Y_j, Z_j) by Picard iteration
        std::vector<double> yj = ey, g(na);
        const std::size_t chunks = chunk_count(na);
        std::vector<double> partial(chunks);
        double delta = 0.0;
        for (unsigned m = 0; m < config.picard_iters; ++m) {
            std::fill(partial.begin(), partial.end(), 0.0);
            parallel_chunks(na, jobs, [&](std::size_t ch, std::size_t b, std::size_t e) {
                for (std::size_t a = b; a < e; ++a) {
                    const std::size_t i = idx[a];
                    const auto ctx = batch.context(i, j);
                    g[a] = checked(driver(ctx, yj[a], std::span<const double>(zbar.data() + a * d, d)), i, j);
                    const double next = ey[a] + dt * g[a];
                    partial[ch] += std::abs(next - yj[a]);
                    yj[a] = next;
                }
            });
            delta = std::accumulate(partial.begin(), partial.end(), 0.0) / static_cast<double>(na);
            deltas[m] = std::max(deltas[m], delta);
            iters_used = std::max(iters_used, m + 1);
            if (delta < config.tolerance) break;
        }
        if (!(delta < config.tolerance)) ++unconverged_nodes;
        for (std::size_t a = 0; a < na; ++a) {
            sol.Y[idx[a] * (N + 1) + j] = yj[a];
            zeta[idx[a]] += dt * g[a];
        }
    }

    deltas.resize(iters_used);
    sol.picard_deltas = std::move(deltas);
    sol.converged = unconverged_nodes == 0;
    if (!sol.converged) {
        sol.warnings.push_back("picard iteration missed the tolerance at " + std::to_string(unconverged_nodes) +
                               " node(s)");
    }
    if (fallbacks) {
        sol.warnings.push_back("basis degree lowered " + std::to_string(fallbacks) +
                               " time(s) for lack of active paths");
    }
    if (sol.z_cap_hits) sol.warnings.push_back("z_cap bound " + std::to_string(sol.z_cap_hits) + " time(s)");

    const double mean = std::accumulate(zeta.begin(), zeta.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : zeta) ss += (v - mean) * (v - mean);
    sol.y0 = mean;
    sol.y0_se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    sol.residual = residual_check(sol, driver, batch).rms;
    return sol;
}

ResidualReport residual_check(const BsdeSolution& solution, const DriverFn& driver, const PathBatch& batch) {
    const std::size_t N = batch.grid().steps();
    const double dt = batch.grid().delta();
    if (solution.n_paths != batch.size() || solution.n_nodes != N + 1) {
        throw ParameterError("solution and batch are not aligned");
    }
    ResidualReport rep;
    double ss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            if (!batch.active(i, j)) break;
            const auto z = solution.z(i, j);
            const double yj = solution.y(i, j);
            const double r = solution.y(i, j + 1) - yj + driver(batch.context(i, j), yj, z) * dt -
                             dot(z, batch.increment(i, j));
            ss += r * r;
            rep.max_abs = std::max(rep.max_abs, std::abs(r));
            ++rep.terms;
        }
    }
    rep.rms = rep.terms ? std::sqrt(ss / static_cast<double>(rep.terms)) : 0.0;
    return rep;
}

// ---- nested Monte Carlo ----------------------------------------------------

double nested_mc_cost(const NestedMcConfig& config) {
    double total = 0.0, level = 1.0;
    for (std::size_t j = 0; j < config.steps; ++j) {
        level *= static_cast<double>(config.inner);
        total += level;
    }
    return static_cast<double>(config.outer) * total;
}

namespace {

struct Tree {
    const DriverFn& driver;
    const StoppingIntegrand& phi;
    double y;
    std::span<const double> z;
    std::span<const double> base;
    TimeGrid grid;
    std::size_t inner;
    bool stopping;
    std::mt19937_64 rng;
    std::normal_distribution<double> normal;
    std::size_t leaves = 0;
    std::size_t stops = 0;

    // (Y_j, g(s_j, Y_j, Z_j)) at an unstopped node
    std::pair<double, double> node(std::size_t j, const std::vector<double>& x, double integral) {
        const std::size_t d = x.size();
        const std::size_t N = grid.steps();
        if (j == N) {
            ++leaves;
            const double Y = y + dot(z, x);
            return {Y, driver(PathContext{grid.node(j), base, x}, Y, z)};
        }
        const double dt = grid.delta();
        double rate = 0.0;
        if (stopping && phi) {
            const double p = phi(PathContext{grid.node(j), base, x});
            rate = p * p * dt;
        }
        Eigen::MatrixXd X(inner, d + 1);
        Eigen::VectorXd v(inner), w(inner);
        std::vector<double> dB(d), child(d);
        for (std::size_t c = 0; c < inner; ++c) {
            for (std::size_t k = 0; k < d; ++k) {
                dB[k] = normal(rng);
                child[k] = x[k] + dB[k];
            }
            double Yc, gc;
            if (stopping && euclidean_norm(child) + integral + rate >= 1.0) {
                ++stops;
                const auto hit = crossing_point(x, dB, integral, rate);
                Yc = y + dot(z, hit);
                gc = 0.0;
            } else {
                std::tie(Yc, gc) = node(j + 1, child, integral + rate);
            }
            X(c, 0) = 1.0;
            for (std::size_t k = 0; k < d; ++k) X(c, k + 1) = dB[k];
            v(c) = Yc + 0.5 * dt * gc;
            w(c) = Yc + dt * gc;
        }
        // Y by the trapezoidal rule, Z from the θ = 1 target
        const auto normal_eq = (X.transpose() * X).ldlt();
        const Eigen::VectorXd coef = normal_eq.solve(X.transpose() * v);
        const Eigen::VectorXd zcoef = normal_eq.solve(X.transpose() * w);
        std::vector<double> Z(zcoef.data() + 1, zcoef.data() + 1 + d);
        const PathContext ctx{grid.node(j), base, x};
        double Y = coef(0);
        for (int it = 0; it < 30; ++it) {
            const double next = coef(0) + 0.5 * dt * driver(ctx, Y, Z);
            const bool done = std::abs(next - Y) < 1e-15 * (1.0 + std::abs(Y));
            Y = next;
            if (done) break;
        }
        const double g = driver(ctx, Y, Z);
        if (!std::isfinite(Y) || !std::isfinite(g)) throw EvaluationError("nested MC produced a non-finite value");
        return {Y, g};
    }
};

}  // namespace

NestedMcResult nested_mc(const DriverFn& driver, double y, std::span<const double> z, double t0,
                         double epsilon, const StoppingIntegrand& phi_at_K, const NestedMcConfig& config,
                         std::span<const double> base) {
    const std::size_t d = z.size();
    if (d == 0) throw ParameterError("nested MC needs d >= 1");
    if (config.steps < 1 || config.steps > 8) throw ParameterError("nested MC supports 1..8 steps");
    if (config.inner < d + 2) throw ParameterError("nested MC needs inner >= d + 2 children per node");
    if (config.outer < 2) throw ParameterError("nested MC needs at least two outer samples");
    const double cost = nested_mc_cost(config);
    if (cost > config.budget) {
        std::ostringstream os;
        os << "nested MC cost " << cost << " node evaluations exceeds the budget " << config.budget;
        throw BudgetError(os.str(), cost);
    }
    const TimeGrid grid(t0, epsilon, config.steps);
    std::vector<double> base_v(base.begin(), base.end());
    if (base_v.empty()) base_v.assign(d, 0.0);

    std::vector<double> est(config.outer);
    std::vector<std::size_t> leaves(config.outer), stops(config.outer);
    parallel_chunks(
        config.outer, default_jobs(),
        [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t t = b; t < e; ++t) {
                Tree tree{driver, phi_at_K, y, z, base_v, grid, config.inner,
                          config.honor_stopping, std::mt19937_64(stream_seed(config.seed, t)),
                          std::normal_distribution<double>(0.0, std::sqrt(grid.delta()))};
                est[t] = tree.node(0, std::vector<double>(d, 0.0), 0.0).first;
                leaves[t] = tree.leaves;
                stops[t] = tree.stops;
            }
        },
        16);
    NestedMcResult out;
    const double n = static_cast<double>(config.outer);
    out.y0 = std::accumulate(est.begin(), est.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : est) ss += (v - out.y0) * (v - out.y0);
    out.se = std::sqrt(ss / (n - 1.0) / n);
    out.cost = cost;
    const double L = std::accumulate(leaves.begin(), leaves.end(), 0.0);
    const double S = std::accumulate(stops.begin(), stops.end(), 0.0);
    out.stopped_fraction = L + S > 0 ? S / (L + S) : 0.0;
    return out;
}

// ---- PDE backend ------------------------------------------------------------

Pde1dSolution::Pde1dSolution(double t0, double epsilon, std::vector<double> x, std::vector<double> times,
                             std::vector<double> layers)
    : t0_(t0), epsilon_(epsilon), x_(std::move(x)), times_(std::move(times)), layers_(std::move(layers)) {}

std::size_t Pde1dSolution::layer_index(double s) const {
    const double r = (s - t0_) / epsilon_ * static_cast<double>(time_steps());
    return static_cast<std::size_t>(std::clamp(std::floor(r), 0.0, static_cast<double>(time_steps())));
}

double Pde1dSolution::value(double s, double x) const {
    const std::size_t M = x_.size() - 1;
    const std::size_t nt = time_steps();
    auto at_layer = [&](std::size_t n) {
        const double pos = std::clamp((x + 1.0) / 2.0 * static_cast<double>(M), 0.0, static_cast<double>(M));
        const std::size_t i = std::min(static_cast<std::size_t>(pos), M - 1);
        const double w = pos - static_cast<double>(i);
        const double* row = layers_.data() + n * (M + 1);
        return (1.0 - w) * row[i] + w * row[i + 1];
    };
    const std::size_t n = layer_index(s);
    if (n >= nt) return at_layer(nt);
    const double w = (s - times_[n]) / (times_[n + 1] - times_[n]);
    return (1.0 - w) * at_layer(n) + w * at_layer(n + 1);
}

double Pde1dSolution::derivative(double s, double x) const {
    const double h = 2.0 / static_cast<double>(x_.size() - 1);
    return (value(s, x + h) - value(s, x - h)) / (2.0 * h);
}

double Pde1dSolution::y0() const { return value(t0_, 0.0); }

std::size_t pde_1d_required_steps(double epsilon, std::size_t space_intervals, double gamma, double z) {
    const double dx = 2.0 / static_cast<double>(space_intervals);
    return static_cast<std::size_t>(std::ceil(epsilon * (1.0 + 2.0 * gamma * (std::abs(z) + 1.0)) / (dx * dx)));
}

Pde1dSolution solve_pde_1d(const DriverFn& driver, double y, double z, double t0, double epsilon,
                           const std::function<double(double)>& phi_at_K, const Pde1dConfig& config) {
    const std::size_t M = config.space_intervals;
    if (M < 4 || M % 2) throw ParameterError("pde-1d needs an even number (>= 4) of space intervals");
    if (!(epsilon > 0.0)) throw ParameterError("pde-1d needs a positive window");
    const std::size_t required = pde_1d_required_steps(epsilon, M, config.gamma, z);
    std::size_t nt = config.time_steps;
    if (nt == 0) {
        nt = static_cast<std::size_t>(std::ceil(1.25 * static_cast<double>(required)));
    } else if (nt < required) {
        std::ostringstream os;
        os << "pde-1d time step violates the stability restriction; need at least " << required << " steps";
        throw CflError(os.str(), static_cast<long>(required));
    }
    const double dx = 2.0 / static_cast<double>(M);
    const double ds = epsilon / static_cast<double>(nt);

    std::vector<double> x(M + 1), times(nt + 1);
    for (std::size_t i = 0; i <= M; ++i) x[i] = -1.0 + dx * static_cast<double>(i);
    x[M / 2] = 0.0;
    for (std::size_t n = 0; n <= nt; ++n) times[n] = t0 + ds * static_cast<double>(n);
    times[nt] = t0 + epsilon;

    // barrier position 1 - ∫_{t0}^{s} φ² (left-endpoint rule on the time grid)
    std::vector<double> integral(nt + 1, 0.0);
    for (std::size_t n = 0; n < nt; ++n) {
        const double p = phi_at_K ? phi_at_K(times[n]) : 0.0;
        integral[n + 1] = integral[n] + p * p * ds;
    }

    std::vector<double> layers((nt + 1) * (M + 1));
    double* top = layers.data() + nt * (M + 1);
    for (std::size_t i = 0; i <= M; ++i) top[i] = y + z * x[i];
    std::vector<double> zx(1), xi(1);
    for (std::size_t n = nt; n-- > 0;) {
        const double* next = layers.data() + (n + 1) * (M + 1);
        double* cur = layers.data() + n * (M + 1);
        const double reach = 1.0 - integral[n];
        for (std::size_t i = 0; i <= M; ++i) {
            if (i == 0 || i == M || std::abs(x[i]) >= reach) {
                cur[i] = y + z * x[i];
                continue;
            }
            const double uxx = (next[i + 1] - 2.0 * next[i] + next[i - 1]) / (dx * dx);
            zx[0] = (next[i + 1] - next[i - 1]) / (2.0 * dx);
            xi[0] = x[i];
            const double g = driver(PathContext{times[n + 1], {}, xi}, next[i], zx);
            if (!std::isfinite(g)) throw EvaluationError("pde-1d generator returned a non-finite value");
            cur[i] = next[i] + ds * (0.5 * uxx + g);
        }
    }
    return Pde1dSolution(t0, epsilon, std::move(x), std::move(times), std::move(layers));
}

void write_solution_csv(const BsdeSolution& s, std::ostream& out) {
    out << "path,node,Y";
    for (std::size_t k = 0; k < s.dimension; ++k) out << ",Z" << k + 1;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < s.n_paths; ++i) {
        for (std::size_t j = 0; j < s.n_nodes; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", s.y(i, j));
            out << i << ',' << j << ',' << buf;
            for (double v : s.z(i, j)) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << ',' << buf;
            }
            out << '\n';
        }
    }
}

}  // namespace bsderep
