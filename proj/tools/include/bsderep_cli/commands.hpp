#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "bsderep_cli/config.hpp"

namespace bsderep::cli {

// Exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitFailed = 2;        // violation, oracle miss or invariant failure
inline constexpr int kExitUnconverged = 3;   // solver did not converge; partial report written
inline constexpr int kExitUsage = 64;        // malformed config or command line

struct RunFlags {
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    bool force = false;
};

/// Writes compliance.csv, compliance_violations.csv and compliance.json.
int cmd_verify_assumptions(const ExperimentConfig& config, const RunFlags& flags, std::ostream& log);

/// Writes oracles.csv and oracles.json.
int cmd_run_oracles(const ExperimentConfig& config, const RunFlags& flags, std::ostream& log);

/// Writes representation.csv, representation_detail.csv and representation.json;
/// on a failed (H1)/(H2) pre-check writes the compliance files instead.
int cmd_run_representation(const ExperimentConfig& config, const RunFlags& flags, std::ostream& log);

/// Pretty-prints a JSON verdict written by one of the commands above.
int cmd_report(const std::string& path, std::ostream& out, std::ostream& log);

/// Full command line entry point (argv[0] is the program name).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bsderep::cli
