#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsderep/families.hpp"
#include "bsderep/oracles.hpp"
#include "bsderep/representation.hpp"

namespace bsderep::cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed config. Each diagnostic is "<json pointer>: <message>".
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

struct ComplianceSettings {
    std::size_t samples = 4000;
    double y_max = 10.0;
    double z_max = 5.0;
    double h3_tolerance = 1e-6;
};

struct ExperimentConfig {
    // generator and target; the only fields without defaults
    std::optional<std::string> family;
    FamilyParams params;
    double t = 0.0;
    std::optional<double> y;
    std::vector<double> z;

    LimitMode mode = LimitMode::L1;
    EpsilonLadder ladder = default_ladder();
    SolverConfig solver;
    std::uint64_t seed = 20240601;
    std::size_t outer_seeds = 0;
    ComplianceSettings compliance;
    OracleSuiteConfig oracles;
    std::string out_dir = "out";

    bool has_target() const { return family.has_value() && y.has_value() && !z.empty(); }
    /// Throws ConfigError naming the missing generator/target fields.
    void require_target() const;
    GeneratorSpec generator() const;
    RepresentationProblem problem() const;
};

/// Checks the tree against the schema (unknown keys are errors) and fills
/// defaults. All problems are collected before throwing.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Seed precedence: explicit flag, then BSDE_REP_SEED, then the config value.
/// Throws ConfigError when BSDE_REP_SEED is not an unsigned integer.
std::uint64_t resolve_seed(std::uint64_t config_seed, std::optional<std::uint64_t> flag);

}  // namespace bsderep::cli
