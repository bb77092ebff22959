// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any failed.
//
//   bsderep_acceptance [--out DIR] [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bsderep/families.hpp"
#include "bsderep/oracles.hpp"
#include "bsderep/representation.hpp"
#include "bsderep_cli/commands.hpp"

using namespace bsderep;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path g_out = "acceptance_out";

// Ladder runs shared by criteria 1 and 3-6, computed on first use.
std::map<std::string, RepresentationReport> g_runs;

RepresentationProblem battery_problem(const std::string& family) {
    FamilyParams p;
    p.scalars["gamma"] = 0.5;
    p.horizon = 0.125;
    RepresentationProblem prob;
    prob.y = 0.1;
    prob.z = {0.1};
    prob.spec = make_generator(family, p, 1);
    return prob;
}

RepresentationProblem quadratic_problem(std::size_t d) {
    RepresentationProblem prob;
    prob.y = 1.0;
    prob.z.assign(d, 0.0);
    prob.z[0] = 2.0;
    prob.spec = pure_quadratic_generator(0.5);
    return prob;
}

const RepresentationReport& ladder_run(const std::string& key) {
    if (auto it = g_runs.find(key); it != g_runs.end()) return it->second;
    RepresentationProblem prob;
    if (key == "pure-quadratic-d1") prob = quadratic_problem(1);
    else if (key == "pure-quadratic-d3") prob = quadratic_problem(3);
    else prob = battery_problem(key);
    auto rep = run_representation(prob, default_ladder(100000), SolverConfig{}, RepresentationOptions{});
    std::ofstream out(g_out / (key + ".csv"));
    write_report_detail_csv(rep, out);
    return g_runs.emplace(key, std::move(rep)).first->second;
}

const std::vector<std::string> kAllRuns{"pure-quadratic-d1", "pure-quadratic-d3", "cubic-damped", "oscillatory",
                                        "stochastic-coefficient"};

// Passes when the named invariant holds on every ladder run.
Verdict invariant_on_all_runs(const std::vector<std::string>& names) {
    Verdict v{true, ""};
    for (const auto& key : kAllRuns) {
        const auto& rep = ladder_run(key);
        for (const auto& c : rep.checks) {
            if (std::find(names.begin(), names.end(), c.name) == names.end() || c.passed) continue;
            v.passed = false;
            v.detail += key + " " + c.name + ": " + c.detail + "; ";
        }
    }
    if (v.passed) v.detail = std::to_string(kAllRuns.size()) + " ladder runs, no violations";
    return v;
}

Verdict criterion1() {
    // Two parts: every rung within 3 SE of 2, and the barrier-neglect bound
    // below 1e-4 at the largest rung. The second fails for this ladder:
    // 2d·exp(-1/(2dε)) at ε = 2^-3 is 0.037 for d = 1.
    bool within = true;
    std::string detail;
    bool barrier_ok = true;
    for (const char* key : {"pure-quadratic-d1", "pure-quadratic-d3"}) {
        const auto& rep = ladder_run(key);
        double worst = 0.0;
        for (const auto& r : rep.rungs) {
            worst = std::max(worst, r.abs_err / r.se);
            if (!(r.abs_err <= 3.0 * r.se)) within = false;
        }
        const double bound = rep.rungs.front().barrier_bound;
        barrier_ok = barrier_ok && bound < 1e-4;
        detail += std::string(key) + " max |err|/SE " + fmt("%.2f", worst) + ", barrier bound " + fmt("%.3g", bound) +
                  "; ";
    }
    detail += std::string("3 SE part ") + (within ? "holds" : "fails") + ", barrier part (< 1e-4) " +
              (barrier_ok ? "holds" : "fails");
    return {within && barrier_ok, detail};
}

Verdict criterion2() {
    OracleSuiteConfig cfg;
    const auto result = run_oracle_suite(default_oracle_cases(), cfg);
    {
        std::ofstream out(g_out / "oracles.csv");
        write_oracle_csv(result, out);
    }
    Verdict v{true, ""};
    int rows = 0;
    for (const auto& r : result.rows) {
        if (r.name.rfind("linear", 0) != 0 || r.backend == "pde-1d") continue;
        ++rows;
        if (!r.passed) {
            v.passed = false;
            v.detail += r.name + "/" + r.backend + " |diff| " + fmt("%.3g", r.abs_diff) + " > tol " +
                        fmt("%.3g", r.tolerance) + "; ";
        }
    }
    if (v.passed) v.detail = std::to_string(rows) + " nested-validation and picard-lsmc rows within tolerance";
    return v;
}

Verdict criterion3() {
    Verdict v{true, ""};
    for (const char* key : {"cubic-damped", "oscillatory", "stochastic-coefficient"}) {
        const auto& rep = ladder_run(key);
        const auto& last = rep.rungs.back();
        const double tol = 0.05 * (1.0 + std::abs(rep.g_target)) + 3.0 * last.se;
        const bool ok = last.abs_err <= tol && rep.fitted_order > 0.0;
        v.passed = v.passed && ok;
        v.detail += std::string(key) + " |err| " + fmt("%.3g", last.abs_err) + " (tol " + fmt("%.3g", tol) +
                    ") slope " + fmt("%.3f", rep.fitted_order) + "; ";
    }
    return v;
}

Verdict criterion4() { return invariant_on_all_runs({"apriori-bound"}); }
Verdict criterion5() { return invariant_on_all_runs({"k-bound", "sqrt-eps-bound", "sqrt-eps-ratio-monotone"}); }
Verdict criterion6() { return invariant_on_all_runs({"prop32-y-decay", "prop32-z-decay"}); }

Verdict criterion7() {
    // Random f with |f(y,z)| ≤ A + B(|y| + |z|²) by construction.
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> u01;
    std::normal_distribution<double> n01;
    std::size_t violations = 0, under = 0, checked = 0;
    for (int inst = 0; inst < 10000; ++inst) {
        const std::size_t d = 1 + inst % 3;
        const double A = 0.1 + 3.0 * u01(rng);
        const double B = 2.0 * u01(rng);
        const unsigned n = 1 + static_cast<unsigned>(20.0 * u01(rng));
        const double w = 4.0 * n01(rng), ph = 6.3 * u01(rng), al = u01(rng), be = u01(rng);
        std::vector<double> v(d);
        for (auto& x : v) x = 2.0 * n01(rng);
        const int kind = inst % 4;
        PlaneFn f = [=](double y, std::span<const double> z) {
            const double zz = dot(z, z), s = std::sin(w * y + dot(v, z) + ph);
            switch (kind) {
                case 0: return A * s + B * (al * y * std::cos(w * y) + be * zz * s);
                case 1: return A * std::tanh(w * y) + B * (al * std::abs(y) + be * zz);
                case 2: return -A * std::cos(dot(v, z)) - B * be * zz;
                default: return A * (std::abs(y) + zz < 0.3 ? 1.0 : s) + B * al * y;
            }
        };
        std::vector<Lemma25Sample> samples;
        const double radius = A / n;
        for (int k = 0; k < 12; ++k) {
            // half the samples near the ball, half spread out
            const double scale = k < 6 ? std::sqrt(radius) : 3.0;
            Lemma25Sample s;
            s.y = scale * scale * n01(rng);
            s.z.resize(d);
            for (auto& x : s.z) x = scale * n01(rng) / std::sqrt(static_cast<double>(d));
            samples.push_back(std::move(s));
        }
        const auto r = lemma25_envelope(A, B, n, f, samples);
        violations += r.violations.size();
        under += r.under_resolution;
        checked += r.n_checked;
    }
    return {violations == 0, "10000 instances, " + std::to_string(checked) + " points, " +
                                 std::to_string(violations) + " violations, " + std::to_string(under) +
                                 " inside-ball grid misses"};
}

Verdict criterion8() {
    Verdict v{true, ""};
    const std::vector<double> eps{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    struct Smooth {
        const char* name;
        std::function<double(double)> f;
        double t;
        double lip;  // on [t, t + 1/8]
    };
    const std::vector<Smooth> smooth{
        {"sin", [](double s) { return std::sin(s); }, 0.3, 1.0},
        {"exp", [](double s) { return std::exp(s); }, 0.0, std::exp(0.125)},
        {"square", [](double s) { return s * s; }, 0.5, 1.25},
        {"sqrt", [](double s) { return std::sqrt(s); }, 1.0, 0.5},
    };
    int rungs = 0;
    for (const auto& s : smooth) {
        for (const auto& r : lebesgue_check(s.f, s.t, eps)) {
            ++rungs;
            if (!(r.abs_err <= s.lip * r.epsilon / 2 + r.quadrature_error)) {
                v.passed = false;
                v.detail += std::string(s.name) + " eps " + fmt("%g", r.epsilon) + "; ";
            }
        }
    }
    // step at 1/2: continuity points on both sides converge, error at rounding level once ε < distance
    auto step = [](double s) { return s < 0.5 ? -1.0 : 2.0; };
    for (double t : {0.3, 0.45, 0.6}) {
        const auto rows = lebesgue_check(step, t, eps);
        bool decreasing = true;
        for (std::size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].abs_err <= rows[i - 1].abs_err + 1e-12;
        if (!decreasing || rows.back().abs_err > 1e-12) {
            v.passed = false;
            v.detail += "step at t=" + fmt("%g", t) + "; ";
        }
    }
    // path functional of the stochastic-coefficient family
    ProcessFn f = [](const PathContext& c) { return std::min(c.brownian_norm(), 1.0); };
    const auto cond = conditional_lebesgue_check(f, 0.5, eps, 1, 4000, 32, 11);
    for (std::size_t i = 1; i < cond.size(); ++i) {
        if (!(cond[i].mean_abs_err < cond[i - 1].mean_abs_err)) {
            v.passed = false;
            v.detail += "conditional rung " + std::to_string(i) + "; ";
        }
    }
    if (v.passed) {
        v.detail = std::to_string(rungs) + " smooth rungs within Lip*eps/2, step function exact at continuity points, "
                   "path average error " + fmt("%.3g", cond.front().mean_abs_err) + " -> " +
                   fmt("%.3g", cond.back().mean_abs_err);
    }
    return v;
}

int run_cli_quiet(std::vector<std::string> args) {
    std::vector<const char*> argv{"bsderep"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Verdict criterion9() {
    DomainSampler sampler;
    const auto h1 = check_h1(y_squared_generator(), sampler, 4000, 1);
    const auto dir = g_out / "negative";
    fs::create_directories(dir);
    const auto cfg = dir / "eps2.json";
    std::ofstream(cfg) << R"({"schema_version": 1,
        "generator": {"family": "pure-quadratic", "params": {"gamma": 0.5}},
        "target": {"y": 1.0, "z": [2.0]},
        "ladder": {"epsilons": [2.0]}})";
    const int code = run_cli_quiet({"run-representation", "--config", cfg.string(), "--out", dir.string()});
    const bool ok = !h1.passed() && code == cli::kExitUsage;
    return {ok, "check_h1(y^2): " + std::to_string(h1.violations.size()) + " violations in 4000 samples; " +
                    "run-representation with eps=2 exits " + std::to_string(code)};
}

Verdict criterion10() {
    const auto dir = g_out / "determinism";
    fs::create_directories(dir);
    const auto cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"schema_version": 1,
        "generator": {"family": "stochastic-coefficient", "params": {"gamma": 0.5}, "horizon": 0.125},
        "target": {"y": 0.1, "z": [0.1, 0.05]},
        "ladder": {"epsilons": [0.125, 0.0625, 0.03125], "paths": 20000},
        "outer_seeds": 4,
        "seed": 99,
        "oracles": {"nested": {"outer": 200}, "lsmc_paths": 20000}})";
    std::vector<std::string> files;
    for (const char* run : {"a", "b"}) {
        const auto out = (dir / run).string();
        const std::string jobs = run[0] == 'a' ? "1" : "4";
        run_cli_quiet({"run-representation", "--config", cfg.string(), "--out", out, "--jobs", jobs});
        run_cli_quiet({"run-oracles", "--config", cfg.string(), "--out", out, "--jobs", jobs});
        run_cli_quiet({"verify-assumptions", "--config", cfg.string(), "--out", out});
    }
    int compared = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        ++compared;
        const auto other = dir / "b" / e.path().filename();
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
    }
    return {compared >= 8 && differ == 0,
            std::to_string(compared) + " report files compared across two runs (jobs 1 vs 4), " +
                std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) g_out = argv[++i];
        else only.insert(std::stoi(a));
    }
    fs::create_directories(g_out);

    const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
        {"quadratic exactness", criterion1},      {"linear oracle", criterion2},
        {"representation battery", criterion3},   {"a priori bound", criterion4},
        {"tilde bounds", criterion5},             {"small-horizon decay", criterion6},
        {"envelope lemma property suite", criterion7}, {"Lebesgue differentiation", criterion8},
        {"negative controls", criterion9},        {"determinism", criterion10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.passed) ++failed;
        std::printf("criterion %2d %s  %s: %s (%.1fs)\n", id, v.passed ? "PASS" : "FAIL", criteria[i].first,
                    v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
