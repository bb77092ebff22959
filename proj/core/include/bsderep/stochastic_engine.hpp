#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "bsderep/generator_model.hpp"

namespace bsderep {

/// Uniform grid t0 = s_0 < ... < s_N = t0 + ε.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double t0, double epsilon, std::size_t steps);

    double t0() const { return t0_; }
    double epsilon() const { return epsilon_; }
    std::size_t steps() const { return steps_; }
    std::size_t nodes() const { return steps_ + 1; }
    double delta() const { return epsilon_ / static_cast<double>(steps_); }
    double node(std::size_t j) const;
    std::vector<double> node_values() const;

private:
    double t0_ = 0.0;
    double epsilon_ = 1.0;
    std::size_t steps_ = 1;
};

/// Validates ε ∈ (0, (T - t0) ∧ 1] and steps ≥ 1.
TimeGrid make_grid(double t0, double epsilon, std::size_t steps,
                   double horizon = std::numeric_limits<double>::infinity());

/// Batch of discretised d-dimensional Brownian paths on one grid.
///
/// Layout is path-major: increment (i, j, k) lives at (i·N + j)·d + k and
/// displacement (i, j, k) at (i·(N+1) + j)·d + k.
class PathBatch {
public:
    static constexpr std::size_t kNeverStopped = std::numeric_limits<std::size_t>::max();

    PathBatch() = default;
    PathBatch(TimeGrid grid, std::size_t d, std::size_t n_paths, std::uint64_t seed,
              std::vector<double> base, std::vector<double> increments);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dimension() const { return d_; }
    std::size_t size() const { return n_paths_; }
    std::uint64_t seed() const { return seed_; }
    std::span<const double> base() const { return base_; }

    std::span<const double> increment(std::size_t path, std::size_t step) const;
    std::span<const double> displacement(std::size_t path, std::size_t node) const;
    PathContext context(std::size_t path, std::size_t node) const;

    bool has_stopping() const { return !tau_index_.empty(); }
    /// First node where the stopping criterion reaches 1, or kNeverStopped.
    std::size_t tau_index(std::size_t path) const;
    /// B_{τ} - B_{t0} on the stopping surface (interpolated inside the
    /// crossing step); equals the terminal displacement for unstopped paths.
    std::span<const double> stopped_displacement(std::size_t path) const;
    /// B_{s_j ∧ τ} - B_{t0}.
    std::span<const double> frozen_displacement(std::size_t path, std::size_t node) const;
    /// 1{s_j < τ}.
    bool active(std::size_t path, std::size_t node) const;
    /// Largest distance by which a grid node overshot the stopping surface.
    double max_overshoot() const { return max_overshoot_; }
    double stopped_fraction() const;

    /// Installs the stopping data; used by hitting_time.
    void set_stopping(std::vector<std::size_t> tau_index, std::vector<double> stopped_displacement,
                      double max_overshoot);

private:
    TimeGrid grid_;
    std::size_t d_ = 1;
    std::size_t n_paths_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> base_;
    std::vector<double> increments_;
    std::vector<double> displacement_;
    std::vector<std::size_t> tau_index_;
    std::vector<double> stopped_displacement_;
    double max_overshoot_ = 0.0;
};

/// Seed of the independent stream for path `index` (splitmix64 of the pair).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

/// Samples i.i.d. N(0, Δ) increments; path i draws from its own stream
/// stream_seed(seed, i), so the batch is identical for any worker count.
/// `base` is B_{t0} (empty means zero).
PathBatch sample_brownian(const TimeGrid& grid, std::size_t d, std::uint64_t seed,
                          std::size_t n_paths, std::vector<double> base = {}, unsigned jobs = 0);

/// Draws a frozen prefix B_{t0} ~ N(0, t0·I_d) from the given seed.
std::vector<double> sample_prefix(double t0, std::size_t d, std::uint64_t seed);

/// Value of φ_s(K) at a path state (the integrand of the stopping rule).
using StoppingIntegrand = std::function<double(const PathContext&)>;

/// τ = first node j with |B_{s_j} - B_{t0}| + Σ_{i<j} φ_{s_i}(K)² Δ ≥ 1.
/// An empty integrand means φ ≡ 0.
PathBatch hitting_time(PathBatch batch, const StoppingIntegrand& phi_at_K, unsigned jobs = 0);

/// Point where |x(θ)| + I(θ) = 1 along the straight segment between two
/// nodes, x(θ) = from + θ·step, I(θ) = i_from + θ·di; requires the criterion
/// to be < 1 at θ = 0 and ≥ 1 at θ = 1.
std::vector<double> crossing_point(std::span<const double> from, std::span<const double> step,
                                   double i_from, double di);

/// ξ = y + ⟨z, B_{(t0+ε)∧τ} - B_{t0}⟩ per path.
struct StoppedTerminal {
    double y = 0.0;
    std::vector<double> z;
    std::vector<double> xi;

    /// Largest |ξ - y| across paths; bounded by |z| because the stopped
    /// displacement never leaves the unit ball.
    double max_deviation() const;
};

StoppedTerminal stopped_terminal(const PathBatch& batch, double y, std::span<const double> z);

/// Debug dump: one row per (path, step) with the d increment columns.
void write_batch_csv(const PathBatch& batch, std::ostream& out);

/// 2d·exp(-1/(2dε)), an upper bound on P(sup_{s≤ε}|B_s| ≥ 1).
double barrier_neglect_bound(std::size_t d, double epsilon);

}  // namespace bsderep
