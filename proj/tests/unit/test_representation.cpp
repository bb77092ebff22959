#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bsderep/errors.hpp"
#include "bsderep/families.hpp"
#include "bsderep/representation.hpp"

using namespace bsderep;

namespace {

RepresentationProblem quadratic_problem() {
    RepresentationProblem p;
    p.y = 1.0;
    p.z = {2.0};
    p.spec = pure_quadratic_generator(0.5);
    return p;
}

}  // namespace

TEST(Ladder, DefaultSteps) {
    EXPECT_EQ(default_steps(0.125), 64u);
    EXPECT_EQ(default_steps(0.0625), 32u);
    EXPECT_EQ(default_steps(0.00390625), 32u);
    const auto l = default_ladder();
    ASSERT_EQ(l.rungs.size(), 6u);
    EXPECT_DOUBLE_EQ(l.rungs.back().epsilon, 0.00390625);
    EXPECT_EQ(l.rungs.front().paths, 100000u);
}

TEST(Ladder, Validation) {
    EXPECT_THROW(make_ladder({2.0}, 10).validate(0.0, 10.0), ParameterError);
    EXPECT_THROW(make_ladder({0.5}, 10).validate(0.8, 1.0), ParameterError);
    EXPECT_THROW(make_ladder({0.1, 0.2}, 10).validate(0.0, 1.0), ParameterError);
    EXPECT_NO_THROW(make_ladder({0.2, 0.1}, 10).validate(0.0, 1.0));
}

TEST(Problem, ModeHypotheses) {
    auto p = quadratic_problem();
    p.mode = LimitMode::Pointwise;
    EXPECT_NO_THROW(p.validate());
    p.spec.phi.hinf_declared = false;
    EXPECT_THROW(p.validate(), ParameterError);
    EXPECT_EQ(parse_mode("pointwise"), LimitMode::Pointwise);
    EXPECT_THROW(parse_mode("L2"), ParameterError);
}

TEST(FitLogSlope, ExactPowerLaw) {
    const std::vector<double> e{0.1, 0.05, 0.025}, err{0.01, 0.0025, 0.000625};
    EXPECT_NEAR(fit_log_slope(e, err), 2.0, 1e-12);
}

TEST(Tilde, TerminalNodeZeroOnUnstoppedPaths) {
    const std::vector<double> z{0.5};
    auto batch = hitting_time(sample_brownian(TimeGrid(0.0, 0.05, 8), 1, 2, 2000), {});
    const auto term = stopped_terminal(batch, 1.0, z);
    const auto sol = solve(pure_quadratic_generator(0.5).eval, term, batch, {});
    const auto t = tilde_transform(sol, batch, 1.0, z, 4.0);
    for (std::size_t i = 0; i < t.n_paths; ++i) {
        if (batch.tau_index(i) == PathBatch::kNeverStopped) EXPECT_NEAR(t.y(i, 8), 0.0, 1e-14);
    }
    EXPECT_EQ(t.k_exceedances, 0u);
    // Y = y + ⟨z,ΔB⟩ + γ|z|²(ε - s): Ỹ at s = 0 is γ|z|²ε
    EXPECT_NEAR(t.y(0, 0), 0.125 * 0.05, 1e-5);
    const auto p = prop32_diagnostics(t, batch.grid());
    EXPECT_NEAR(p.y_mean, 0.125 * 0.05 * (1.0 + 1.0 / 8) / 2, 1e-4);  // left-endpoint sum
    EXPECT_LT(p.z_mean, 1e-6);
}

TEST(Harness, QuadraticLadder) {
    const auto ladder = make_ladder({0.125, 0.0625, 0.03125}, 20000);
    const auto r = run_representation(quadratic_problem(), ladder, {}, {});
    ASSERT_EQ(r.rungs.size(), 3u);
    EXPECT_DOUBLE_EQ(r.g_target, 2.0);
    for (const auto& rung : r.rungs) {
        EXPECT_TRUE(std::isfinite(rung.g_hat));
        EXPECT_LE(rung.abs_err, 3.0 * rung.se + 0.05);
        EXPECT_LE(rung.max_abs_y, 1.05 * rung.apriori_bound);
    }
    std::ostringstream os;
    write_report_csv(r, os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
              "epsilon,g_hat,se,abs_err,sup_ytilde_ratio,prop32_y,prop32_z,flags");
}

TEST(Harness, RefusesNonCompliantGenerator) {
    RepresentationProblem p;
    p.y = 0.5;
    p.z = {0.5};
    p.spec = y_squared_generator();
    EXPECT_THROW(run_representation(p, make_ladder({0.1}, 100), {}, {}), ComplianceError);
}

TEST(Harness, RefusesLargeEpsilon) {
    EXPECT_THROW(run_representation(quadratic_problem(), make_ladder({2.0}, 100), {}, {}), ParameterError);
}

TEST(Invariants, DecayCheckFailsOnIncrease) {
    RepresentationReport r;
    r.g_target = 0.0;
    for (double e : {0.1, 0.05, 0.025}) {
        RungReport rr;
        rr.epsilon = e;
        rr.k = rr.apriori_bound = 10.0;
        rr.sqrt_eps_c = 1.0;
        rr.abs_err = e;
        rr.g_hat = e;
        rr.prop32_y = e;
        rr.prop32_z = 1.0 / e;
        r.rungs.push_back(rr);
    }
    bool saw_z = false;
    for (const auto& c : evaluate_invariants(r)) {
        if (c.name == "prop32-z-decay") {
            saw_z = true;
            EXPECT_FALSE(c.passed);
        }
    }
    EXPECT_TRUE(saw_z);
}
