#include "bsderep/stochastic_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "bsderep/errors.hpp"
#include "bsderep/parallel.hpp"

namespace bsderep {

TimeGrid::TimeGrid(double t0, double epsilon, std::size_t steps)
    : t0_(t0), epsilon_(epsilon), steps_(steps) {
    if (steps == 0) throw ParameterError("time grid needs at least one step");
    if (!(epsilon > 0.0)) throw ParameterError("time grid needs a positive window");
}

double TimeGrid::node(std::size_t j) const {
    if (j == steps_) return t0_ + epsilon_;
    return t0_ + epsilon_ * static_cast<double>(j) / static_cast<double>(steps_);
}

std::vector<double> TimeGrid::node_values() const {
    std::vector<double> out(nodes());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = node(j);
    return out;
}

TimeGrid make_grid(double t0, double epsilon, std::size_t steps, double horizon) {
    if (!(t0 >= 0.0)) throw ParameterError("t0 must be nonnegative");
    const double upper = std::min(horizon - t0, 1.0);
    if (!(epsilon > 0.0) || epsilon > upper) {
        std::ostringstream os;
        os << "epsilon=" << epsilon << " outside (0, (T-t)^1] = (0, " << upper << "]";
        throw ParameterError(os.str());
    }
    if (steps == 0) throw ParameterError("steps must be at least 1");
    return TimeGrid(t0, epsilon, steps);
}

PathBatch::PathBatch(TimeGrid grid, std::size_t d, std::size_t n_paths, std::uint64_t seed,
                     std::vector<double> base, std::vector<double> increments)
    : grid_(grid), d_(d), n_paths_(n_paths), seed_(seed), base_(std::move(base)),
      increments_(std::move(increments)) {
    const std::size_t N = grid_.steps();
    if (d_ == 0 || n_paths_ == 0) throw ParameterError("path batch needs d >= 1 and n_paths >= 1");
    if (increments_.size() != n_paths_ * N * d_) throw ParameterError("increment array has the wrong size");
    if (base_.empty()) base_.assign(d_, 0.0);
    if (base_.size() != d_) throw ParameterError("base point has the wrong dimension");
    displacement_.assign(n_paths_ * (N + 1) * d_, 0.0);
    for (std::size_t i = 0; i < n_paths_; ++i) {
        double* disp = displacement_.data() + i * (N + 1) * d_;
        const double* inc = increments_.data() + i * N * d_;
        for (std::size_t j = 0; j < N; ++j) {
            for (std::size_t k = 0; k < d_; ++k) disp[(j + 1) * d_ + k] = disp[j * d_ + k] + inc[j * d_ + k];
        }
    }
}

std::span<const double> PathBatch::increment(std::size_t path, std::size_t step) const {
    return {increments_.data() + (path * grid_.steps() + step) * d_, d_};
}

std::span<const double> PathBatch::displacement(std::size_t path, std::size_t node) const {
    return {displacement_.data() + (path * grid_.nodes() + node) * d_, d_};
}

PathContext PathBatch::context(std::size_t path, std::size_t node) const {
    return {grid_.node(node), base_, frozen_displacement(path, node)};
}

std::size_t PathBatch::tau_index(std::size_t path) const {
    return tau_index_.empty() ? kNeverStopped : tau_index_[path];
}

std::span<const double> PathBatch::stopped_displacement(std::size_t path) const {
    if (tau_index(path) == kNeverStopped) return displacement(path, grid_.steps());
    return {stopped_displacement_.data() + path * d_, d_};
}

std::span<const double> PathBatch::frozen_displacement(std::size_t path, std::size_t node) const {
    return active(path, node) ? displacement(path, node) : stopped_displacement(path);
}

bool PathBatch::active(std::size_t path, std::size_t node) const {
    const std::size_t tau = tau_index(path);
    return tau == kNeverStopped || node < tau;
}

double PathBatch::stopped_fraction() const {
    if (tau_index_.empty()) return 0.0;
    const auto stopped = std::count_if(tau_index_.begin(), tau_index_.end(),
                                       [](std::size_t t) { return t != kNeverStopped; });
    return static_cast<double>(stopped) / static_cast<double>(n_paths_);
}

void PathBatch::set_stopping(std::vector<std::size_t> tau_index, std::vector<double> stopped_displacement,
                             double max_overshoot) {
    if (tau_index.size() != n_paths_ || stopped_displacement.size() != n_paths_ * d_) {
        throw ParameterError("stopping data does not match the batch");
    }
    tau_index_ = std::move(tau_index);
    stopped_displacement_ = std::move(stopped_displacement);
    max_overshoot_ = max_overshoot;
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    return mix(mix(master) ^ index);
}

PathBatch sample_brownian(const TimeGrid& grid, std::size_t d, std::uint64_t seed, std::size_t n_paths,
                          std::vector<double> base, unsigned jobs) {
    if (d == 0 || n_paths == 0) throw ParameterError("sample_brownian needs d >= 1 and n_paths >= 1");
    const std::size_t per_path = grid.steps() * d;
    std::vector<double> inc(n_paths * per_path);
    const double sd = std::sqrt(grid.delta());
    parallel_chunks(n_paths, jobs ? jobs : default_jobs(), [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            std::mt19937_64 rng(stream_seed(seed, i));
            std::normal_distribution<double> normal(0.0, sd);
            double* out = inc.data() + i * per_path;
            for (std::size_t m = 0; m < per_path; ++m) out[m] = normal(rng);
        }
    });
    return PathBatch(grid, d, n_paths, seed, std::move(base), std::move(inc));
}

std::vector<double> sample_prefix(double t0, std::size_t d, std::uint64_t seed) {
    std::vector<double> out(d, 0.0);
    if (t0 <= 0.0) return out;
    std::mt19937_64 rng(stream_seed(seed, ~0ULL));
    std::normal_distribution<double> normal(0.0, std::sqrt(t0));
    for (auto& v : out) v = normal(rng);
    return out;
}

std::vector<double> crossing_point(std::span<const double> from, std::span<const double> step,
                                   double i_from, double di) {
    const std::size_t d = from.size();
    std::vector<double> x(d);
    auto at = [&](double theta) {
        for (std::size_t k = 0; k < d; ++k) x[k] = from[k] + theta * step[k];
        return euclidean_norm(x) + i_from + theta * di;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) < 1.0 ? lo : hi) = mid;
    }
    at(lo);
    return x;
}

PathBatch hitting_time(PathBatch batch, const StoppingIntegrand& phi_at_K, unsigned jobs) {
    const std::size_t n = batch.size();
    const std::size_t d = batch.dimension();
    const std::size_t N = batch.grid().steps();
    const double dt = batch.grid().delta();
    std::vector<std::size_t> tau(n, PathBatch::kNeverStopped);
    std::vector<double> stopped(n * d, 0.0);
    std::vector<double> overshoot(chunk_count(n), 0.0);
    const auto base = batch.base();

    parallel_chunks(n, jobs ? jobs : default_jobs(), [&](std::size_t c, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double integral = 0.0, prev_integral = 0.0, prev_rate = 0.0;
            for (std::size_t j = 0; j <= N; ++j) {
                const auto x = batch.displacement(i, j);
                const double crit = euclidean_norm(x) + integral;
                if (crit >= 1.0) {
                    tau[i] = j;
                    overshoot[c] = std::max(overshoot[c], crit - 1.0);
                    std::vector<double> step(d);
                    const auto xp = batch.displacement(i, j - 1);
                    for (std::size_t k = 0; k < d; ++k) step[k] = x[k] - xp[k];
                    const auto hit = crossing_point(xp, step, prev_integral, prev_rate);
                    std::copy(hit.begin(), hit.end(), stopped.begin() + i * d);
                    break;
                }
                if (j == N) break;
                double rate = 0.0;
                if (phi_at_K) {
                    const double phi = phi_at_K(PathContext{batch.grid().node(j), base, x});
                    rate = phi * phi * dt;
                }
                prev_integral = integral;
                prev_rate = rate;
                integral += rate;
            }
        }
    });
    batch.set_stopping(std::move(tau), std::move(stopped),
                       *std::max_element(overshoot.begin(), overshoot.end()));
    return batch;
}

double StoppedTerminal::max_deviation() const {
    double m = 0.0;
    for (double v : xi) m = std::max(m, std::abs(v - y));
    return m;
}

StoppedTerminal stopped_terminal(const PathBatch& batch, double y, std::span<const double> z) {
    if (z.size() != batch.dimension()) throw ParameterError("z has the wrong dimension");
    StoppedTerminal out{y, {z.begin(), z.end()}, std::vector<double>(batch.size())};
    for (std::size_t i = 0; i < batch.size(); ++i) out.xi[i] = y + dot(z, batch.stopped_displacement(i));
    return out;
}

void write_batch_csv(const PathBatch& batch, std::ostream& out) {
    out << "path,step";
    for (std::size_t k = 0; k < batch.dimension(); ++k) out << ",dB" << k + 1;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < batch.grid().steps(); ++j) {
            out << i << ',' << j;
            for (double v : batch.increment(i, j)) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << ',' << buf;
            }
            out << '\n';
        }
    }
}

double barrier_neglect_bound(std::size_t d, double epsilon) {
    const double dd = static_cast<double>(d);
    return 2.0 * dd * std::exp(-1.0 / (2.0 * dd * epsilon));
}

}  // namespace bsderep
