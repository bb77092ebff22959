#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bsderep/errors.hpp"
#include "bsderep/stochastic_engine.hpp"

using namespace bsderep;

TEST(TimeGrid, Nodes) {
    const TimeGrid g(0.5, 0.25, 4);
    EXPECT_DOUBLE_EQ(g.delta(), 0.0625);
    EXPECT_DOUBLE_EQ(g.node(0), 0.5);
    EXPECT_DOUBLE_EQ(g.node(4), 0.75);
    EXPECT_EQ(g.nodes(), 5u);
    EXPECT_THROW(make_grid(0.0, 2.0, 4), ParameterError);
    EXPECT_THROW(make_grid(0.9, 0.2, 4, 1.0), ParameterError);
    EXPECT_THROW(make_grid(0.0, 0.1, 0), ParameterError);
}

TEST(Brownian, MomentsAndDisplacement) {
    const TimeGrid g(0.0, 0.5, 8);
    const auto b = sample_brownian(g, 2, 11, 40000);
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double x = b.displacement(i, 8)[1];
        m += x;
        v += x * x;
        double sum = 0.0;
        for (std::size_t j = 0; j < 8; ++j) sum += b.increment(i, j)[1];
        ASSERT_NEAR(sum, x, 1e-12);
    }
    m /= 40000.0;
    v /= 40000.0;
    EXPECT_NEAR(m, 0.0, 4.0 * std::sqrt(0.5 / 40000.0));
    EXPECT_NEAR(v, 0.5, 4.0 * 0.5 * std::sqrt(2.0 / 40000.0));
}

TEST(Brownian, DeterministicForAnyJobCount) {
    const TimeGrid g(0.0, 0.1, 16);
    const auto a = sample_brownian(g, 3, 99, 9000, {}, 1);
    const auto b = sample_brownian(g, 3, 99, 9000, {}, 4);
    for (std::size_t i = 0; i < a.size(); i += 997) {
        for (std::size_t j = 0; j < 16; ++j) {
            const auto x = a.increment(i, j), y = b.increment(i, j);
            for (std::size_t k = 0; k < 3; ++k) ASSERT_EQ(x[k], y[k]);
        }
    }
    EXPECT_NE(stream_seed(1, 0), stream_seed(1, 1));
}

TEST(HittingTime, StoppedDisplacementOnTheSurface) {
    const TimeGrid g(0.0, 1.0, 64);
    auto b = hitting_time(sample_brownian(g, 2, 5, 4000), {});
    ASSERT_TRUE(b.has_stopping());
    std::size_t stopped = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto x = b.stopped_displacement(i);
        const double r = std::hypot(x[0], x[1]);
        if (b.tau_index(i) != PathBatch::kNeverStopped) {
            ++stopped;
            EXPECT_NEAR(r, 1.0, 1e-9);
            EXPECT_FALSE(b.active(i, b.tau_index(i)));
            EXPECT_TRUE(b.active(i, b.tau_index(i) - 1));
        } else {
            EXPECT_LT(r, 1.0);
        }
    }
    EXPECT_GT(stopped, 0u);
    EXPECT_NEAR(b.stopped_fraction(), static_cast<double>(stopped) / 4000.0, 1e-15);
}

TEST(HittingTime, IntegrandShortensTau) {
    // φ(K) ≡ 2: ∫φ² reaches 1 at s = 1/4 even without displacement
    const TimeGrid g(0.0, 0.5, 32);
    auto b = hitting_time(sample_brownian(g, 1, 5, 200), [](const PathContext&) { return 2.0; });
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_LE(b.tau_index(i), 16u);
}

TEST(CrossingPoint, Linear) {
    const std::vector<double> from{0.5}, step{1.0};
    const auto x = crossing_point(from, step, 0.0, 0.0);
    EXPECT_NEAR(x[0], 1.0, 1e-12);
    const auto y = crossing_point(from, step, 0.2, 0.2);  // |0.5+θ| + 0.2 + 0.2θ = 1
    EXPECT_NEAR(y[0], 0.5 + 0.3 / 1.2, 1e-12);
}

TEST(StoppedTerminal, DeviationBoundedByZ) {
    const TimeGrid g(0.0, 1.0, 32);
    auto b = hitting_time(sample_brownian(g, 2, 8, 3000), {});
    const std::vector<double> z{0.6, 0.8};
    const auto t = stopped_terminal(b, 1.0, z);
    EXPECT_LE(t.max_deviation(), 1.0 + 1e-12);
}

TEST(BarrierBound, ClosedForm) {
    EXPECT_NEAR(barrier_neglect_bound(1, 0.125), 0.036631277777468361, 1e-16);
    EXPECT_NEAR(barrier_neglect_bound(3, 0.125), 1.5815828286943606, 1e-14);
}

TEST(BatchCsv, Header) {
    const auto b = sample_brownian(TimeGrid(0.0, 0.1, 2), 2, 1, 2);
    std::ostringstream os;
    write_batch_csv(b, os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "path,step,dB1,dB2");
}
