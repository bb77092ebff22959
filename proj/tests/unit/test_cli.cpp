#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bsderep_cli/commands.hpp"
#include "bsderep_cli/config.hpp"

using namespace bsderep::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("bsderep_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const json& doc) {
    const auto p = dir / "config.json";
    std::ofstream(p) << doc.dump();
    return p;
}

int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"bsderep"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

json small_quadratic() {
    return {{"schema_version", 1},
            {"generator", {{"family", "pure-quadratic"}, {"params", {{"gamma", 0.5}}}}},
            {"target", {{"y", 1.0}, {"z", {2.0}}}},
            {"ladder", {{"epsilons", {0.125, 0.0625}}, {"paths", 4000}}}};
}

}  // namespace

TEST(Config, Defaults) {
    const auto c = parse_config(json{{"schema_version", 1}});
    EXPECT_FALSE(c.has_target());
    EXPECT_EQ(c.ladder.rungs.size(), 6u);
    EXPECT_EQ(c.seed, 20240601u);
    EXPECT_EQ(c.out_dir, "out");
    EXPECT_THROW(c.require_target(), ConfigError);
}

TEST(Config, CollectsAllDiagnostics) {
    try {
        parse_config(json{{"schema_version", 3},
                          {"bogus", 1},
                          {"target", {{"y", "one"}, {"z", json::array()}}},
                          {"solver", {{"picard_iters", -2}}}});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.diagnostics().size(), 5u) << e.what();
    }
}

TEST(Config, LadderStepsAndRange) {
    auto doc = small_quadratic();
    doc["ladder"]["steps"] = {8, 4};
    const auto c = parse_config(doc);
    EXPECT_EQ(c.ladder.rungs[1].steps, 4u);
    EXPECT_EQ(c.ladder.rungs[0].paths, 4000u);
    doc["ladder"]["epsilons"] = {2.0};
    doc["ladder"].erase("steps");
    EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(Config, SeedPrecedence) {
    ::unsetenv("BSDE_REP_SEED");
    EXPECT_EQ(resolve_seed(5, std::nullopt), 5u);
    ::setenv("BSDE_REP_SEED", "17", 1);
    EXPECT_EQ(resolve_seed(5, std::nullopt), 17u);
    EXPECT_EQ(resolve_seed(5, 9u), 9u);
    ::setenv("BSDE_REP_SEED", "x1", 1);
    EXPECT_THROW(resolve_seed(5, std::nullopt), ConfigError);
    ::unsetenv("BSDE_REP_SEED");
}

TEST(Cli, VerifyAssumptionsExitCodes) {
    const auto dir = scratch("verify");
    auto doc = small_quadratic();
    EXPECT_EQ(run({"verify-assumptions", "--config", write_config(dir, doc).string(), "--out", dir.string()}), kExitOk);
    EXPECT_TRUE(fs::exists(dir / "compliance.json"));
    doc["generator"] = {{"family", "y-squared"}};
    EXPECT_EQ(run({"verify-assumptions", "--config", write_config(dir, doc).string(), "--out", dir.string()}),
              kExitFailed);
    doc.erase("generator");
    EXPECT_EQ(run({"verify-assumptions", "--config", write_config(dir, doc).string(), "--out", dir.string()}),
              kExitUsage);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}), kExitUsage);
    EXPECT_EQ(run({"frobnicate"}), kExitUsage);
    EXPECT_EQ(run({"run-representation"}), kExitUsage);
    EXPECT_EQ(run({"run-representation", "--config", "/nonexistent/config.json"}), kExitUsage);
    EXPECT_EQ(run({"report", "/nonexistent/verdict.json"}), kExitUsage);
}

TEST(Cli, RepresentationRefusals) {
    const auto dir = scratch("refuse");
    auto doc = small_quadratic();
    doc["ladder"]["epsilons"] = {2.0};
    EXPECT_EQ(run({"run-representation", "--config", write_config(dir, doc).string(), "--out", dir.string()}),
              kExitUsage);
    doc = small_quadratic();
    doc["generator"] = {{"family", "y-squared"}};
    EXPECT_EQ(run({"run-representation", "--config", write_config(dir, doc).string(), "--out", dir.string()}),
              kExitFailed);
    EXPECT_TRUE(fs::exists(dir / "compliance.csv"));
}

TEST(Cli, RepresentationIsByteReproducible) {
    const auto dir = scratch("repro");
    const auto cfg = write_config(dir, small_quadratic()).string();
    run({"run-representation", "--config", cfg, "--out", (dir / "a").string(), "--jobs", "1"});
    run({"run-representation", "--config", cfg, "--out", (dir / "b").string(), "--jobs", "2"});
    run({"run-representation", "--config", cfg, "--out", (dir / "c").string(), "--seed", "3"});
    for (const auto* f : {"representation.csv", "representation_detail.csv", "representation.json"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
        EXPECT_NE(slurp(dir / "a" / f), slurp(dir / "c" / f)) << f;
    }
    EXPECT_EQ(run({"report", (dir / "a" / "representation.json").string()}), kExitOk);
}

TEST(Cli, TightOracleToleranceFails) {
    const auto dir = scratch("oracles");
    const json doc{{"schema_version", 1},
                   {"oracles", {{"tolerance", 1e-9}, {"nested", {{"outer", 100}}}, {"lsmc_paths", 4000}}}};
    EXPECT_EQ(run({"run-oracles", "--config", write_config(dir, doc).string(), "--out", dir.string()}), kExitFailed);
    EXPECT_TRUE(fs::exists(dir / "oracles.csv"));
}
