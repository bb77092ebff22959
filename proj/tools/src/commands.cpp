#include "bsderep_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bsderep/errors.hpp"
#include "bsderep/parallel.hpp"

namespace bsderep::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// NaN and infinities become strings so the blob stays valid JSON.
json num(double v) {
    if (std::isfinite(v)) return v;
    return g17(v);
}

json config_echo(const ExperimentConfig& c, const RunFlags& f) {
    json j;
    if (c.family) j["family"] = *c.family;
    if (c.y) j["y"] = *c.y;
    if (!c.z.empty()) j["z"] = c.z;
    j["t"] = c.t;
    j["seed"] = f.seed;
    return j;
}

SolverConfig solver_for(const ExperimentConfig& c, const RunFlags& f) {
    SolverConfig s = c.solver;
    s.jobs = f.jobs;
    return s;
}

std::vector<ComplianceReport> write_compliance(const std::vector<ComplianceReport>& reports, const ExperimentConfig& c,
                                               const RunFlags& f, const std::string& command, int exit_code) {
    {
        auto out = open_out(fs::path(f.out_dir) / "compliance.csv");
        out << "assumption,samples,violations,verdict\n";
        for (const auto& r : reports) {
            out << to_string(r.assumption) << ',' << r.n_samples << ',' << r.violations.size() << ',' << r.verdict()
                << '\n';
        }
    }
    {
        auto out = open_out(fs::path(f.out_dir) / "compliance_violations.csv");
        out << "assumption,t,y,z,lhs,rhs,kind\n";
        for (const auto& r : reports) {
            for (const auto& v : r.violations) {
                std::string z;
                for (std::size_t i = 0; i < v.z.size(); ++i) z += (i ? ";" : "") + g17(v.z[i]);
                out << to_string(r.assumption) << ',' << g17(v.t) << ',' << g17(v.y) << ',' << z << ','
                    << g17(v.lhs) << ',' << g17(v.rhs) << ',' << v.kind << '\n';
            }
        }
    }
    json doc;
    doc["command"] = command;
    doc["config"] = config_echo(c, f);
    doc["exit_code"] = exit_code;
    doc["verdict"] = exit_code == kExitOk ? "pass-at-sampled-points" : "violated";
    doc["reports"] = json::array();
    for (const auto& r : reports) {
        json jr{{"assumption", to_string(r.assumption)},
                {"samples", r.n_samples},
                {"violations", r.violations.size()},
                {"verdict", r.verdict()}};
        if (!r.violations.empty()) {
            const auto& v = r.violations.front();
            jr["first_violation"] = {{"t", num(v.t)}, {"y", num(v.y)}, {"z", v.z},
                                     {"lhs", num(v.lhs)}, {"rhs", num(v.rhs)}, {"kind", v.kind}};
        }
        doc["reports"].push_back(jr);
    }
    write_json(fs::path(f.out_dir) / "compliance.json", doc);
    return reports;
}

void prepare(const RunFlags& f) {
    fs::create_directories(f.out_dir);
    if (f.jobs) set_default_jobs(f.jobs);
}

}  // namespace

int cmd_verify_assumptions(const ExperimentConfig& config, const RunFlags& flags, std::ostream& log) {
    const auto spec = config.generator();
    prepare(flags);
    const std::size_t d = config.z.size();
    DomainSampler sampler;
    sampler.y_max = config.compliance.y_max;
    sampler.z_max = config.compliance.z_max;
    sampler.t_max = std::min(spec.horizon, 1.0);
    const std::size_t n = config.compliance.samples;
    std::vector<ComplianceReport> reports{check_h1(spec, sampler, n, d), check_h2(spec, sampler, n, d),
                                          check_h3(spec, sampler, n, d, config.compliance.h3_tolerance)};
    if (!spec.continuity_declared) {
        log << "note: generator '" << spec.name << "' does not declare continuity in (y, z)\n";
    }
    bool ok = true;
    for (const auto& r : reports) {
        log << to_string(r.assumption) << ": " << r.verdict() << " (" << r.violations.size() << " of "
            << r.n_samples << " samples)\n";
        ok = ok && r.passed();
    }
    const int code = ok ? kExitOk : kExitFailed;
    write_compliance(reports, config, flags, "verify-assumptions", code);
    return code;
}

int cmd_run_oracles(const ExperimentConfig& config, const RunFlags& flags, std::ostream& log) {
    prepare(flags);
    OracleSuiteConfig oc = config.oracles;
    oc.seed = flags.seed;
    oc.solver = solver_for(config, flags);
    const auto result = run_oracle_suite(default_oracle_cases(), oc);
    {
        auto out = open_out(fs::path(flags.out_dir) / "oracles.csv");
        write_oracle_csv(result, out);
    }
    const int code = result.passed() ? kExitOk : kExitFailed;
    json doc;
    doc["command"] = "run-oracles";
    doc["config"] = config_echo(config, flags);
    doc["exit_code"] = code;
    doc["verdict"] = code == kExitOk ? "pass" : "fail";
    doc["rows"] = json::array();
    for (const auto& r : result.rows) {
        doc["rows"].push_back({{"case", r.name},
                               {"backend", r.backend},
                               {"closed_form", num(r.closed_form)},
                               {"estimate", num(r.estimate)},
                               {"se", num(r.se)},
                               {"abs_diff", num(r.abs_diff)},
                               {"tolerance", num(r.tolerance)},
                               {"passed", r.passed}});
        log << std::left << std::setw(14) << r.name << std::setw(13) << r.backend << (r.passed ? "ok  " : "FAIL")
            << "  |diff| " << g17(r.abs_diff) << "  tol " << g17(r.tolerance) << '\n';
    }
    write_json(fs::path(flags.out_dir) / "oracles.json", doc);
    return code;
}

int cmd_run_representation(const ExperimentConfig& config, const RunFlags& flags, std::ostream& log) {
    const auto problem = config.problem();
    prepare(flags);
    RepresentationOptions opts;
    opts.seed = flags.seed;
    opts.outer_seeds = config.outer_seeds;
    opts.compliance_samples = config.compliance.samples;
    if (flags.force) {
        log << "warning: --force skips the (H1)/(H2) pre-check\n";
        opts.compliance_samples = 0;
    }
    RepresentationReport report;
    try {
        report = run_representation(problem, config.ladder, solver_for(config, flags), opts);
    } catch (const ComplianceError& e) {
        log << "refused: " << e.what() << '\n';
        write_compliance(e.reports(), config, flags, "run-representation", kExitFailed);
        return kExitFailed;
    }
    {
        auto out = open_out(fs::path(flags.out_dir) / "representation.csv");
        write_report_csv(report, out);
    }
    {
        auto out = open_out(fs::path(flags.out_dir) / "representation_detail.csv");
        write_report_detail_csv(report, out);
    }
    const int code = !report.all_converged ? kExitUnconverged : report.passed() ? kExitOk : kExitFailed;

    json doc;
    doc["command"] = "run-representation";
    doc["config"] = config_echo(config, flags);
    doc["generator"] = report.generator;
    doc["mode"] = to_string(report.mode);
    doc["g_target"] = num(report.g_target);
    doc["fitted_order"] = num(report.fitted_order);
    doc["all_converged"] = report.all_converged;
    doc["exit_code"] = code;
    doc["verdict"] = code == kExitOk ? "pass" : code == kExitUnconverged ? "unconverged" : "fail";
    doc["checks"] = json::array();
    for (const auto& c : report.checks) {
        doc["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    doc["rungs"] = json::array();
    for (const auto& r : report.rungs) {
        doc["rungs"].push_back({{"epsilon", num(r.epsilon)},
                                {"g_hat", num(r.g_hat)},
                                {"se", num(r.se)},
                                {"abs_err", num(r.abs_err)},
                                {"sup_ytilde_ratio", num(r.sup_ytilde_ratio)},
                                {"prop32_y", num(r.prop32_y)},
                                {"prop32_z", num(r.prop32_z)},
                                {"flags", r.flags}});
    }
    write_json(fs::path(flags.out_dir) / "representation.json", doc);

    log << report.generator << ": g(t,y,z) = " << g17(report.g_target) << ", fitted order "
        << g17(report.fitted_order) << '\n';
    for (const auto& c : report.checks) log << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << "  " << c.detail << '\n';
    return code;
}

int cmd_report(const std::string& path, std::ostream& out, std::ostream& log) {
    std::ifstream in(path);
    if (!in) {
        log << path << ": cannot open\n";
        return kExitUsage;
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        log << path << ": " << e.what() << '\n';
        return kExitUsage;
    }
    if (!doc.is_object() || !doc.contains("command")) {
        log << path << ": not a verdict file\n";
        return kExitUsage;
    }
    auto str = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    out << "command   " << str(doc["command"]) << '\n';
    if (doc.contains("verdict")) out << "verdict   " << str(doc["verdict"]) << " (exit " << str(doc["exit_code"]) << ")\n";
    if (doc.contains("config")) out << "config    " << doc["config"].dump() << '\n';
    if (doc.contains("generator")) {
        out << "generator " << str(doc["generator"]) << ", mode " << str(doc["mode"]) << ", g = " << str(doc["g_target"])
            << ", fitted order " << str(doc["fitted_order"]) << '\n';
    }
    if (doc.contains("reports")) {
        out << "\nassumption  samples  violations  verdict\n";
        for (const auto& r : doc["reports"]) {
            out << std::left << std::setw(12) << str(r["assumption"]) << std::setw(9) << str(r["samples"])
                << std::setw(12) << str(r["violations"]) << str(r["verdict"]) << '\n';
        }
    }
    if (doc.contains("rows")) {
        out << "\ncase          backend      passed  abs_diff                 tolerance\n";
        for (const auto& r : doc["rows"]) {
            out << std::left << std::setw(14) << str(r["case"]) << std::setw(13) << str(r["backend"]) << std::setw(8)
                << (r["passed"].get<bool>() ? "yes" : "no") << std::setw(25) << str(r["abs_diff"])
                << str(r["tolerance"]) << '\n';
        }
    }
    if (doc.contains("rungs")) {
        out << "\nepsilon      g_hat                  se                     abs_err                flags\n";
        for (const auto& r : doc["rungs"]) {
            std::string fl;
            for (const auto& f : r["flags"]) fl += (fl.empty() ? "" : ";") + str(f);
            out << std::left << std::setw(13) << str(r["epsilon"]) << std::setw(23) << str(r["g_hat"])
                << std::setw(23) << str(r["se"]) << std::setw(23) << str(r["abs_err"]) << (fl.empty() ? "none" : fl)
                << '\n';
        }
    }
    if (doc.contains("checks")) {
        out << '\n';
        for (const auto& c : doc["checks"]) {
            out << (c["passed"].get<bool>() ? "ok    " : "FAIL  ") << std::left << std::setw(26) << str(c["name"])
                << str(c["detail"]) << '\n';
        }
    }
    return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-horizon BSDE representation experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, report_path;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 0;
    bool force = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "experiment config (JSON)");
        if (config_required) opt->required();
        sub->add_option("--seed", seed, "overrides BSDE_REP_SEED and the config seed");
        sub->add_option("--jobs", jobs, "worker threads (0: hardware concurrency)");
        sub->add_option("--out", out_dir, "output directory (default: config output.dir)");
    };
    auto* verify = app.add_subcommand("verify-assumptions", "sampled checks of the growth and continuity conditions");
    add_common(verify, true);
    auto* oracles = app.add_subcommand("run-oracles", "closed forms against nested MC, picard-lsmc and pde-1d");
    add_common(oracles, false);
    auto* repr = app.add_subcommand("run-representation", "epsilon ladder for the quotient estimator");
    add_common(repr, true);
    repr->add_flag("--force", force, "run even if the (H1)/(H2) pre-check fails");
    auto* report = app.add_subcommand("report", "pretty-print a JSON verdict");
    report->add_option("path", report_path, "verdict file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (report->parsed()) return cmd_report(report_path, out, err);

        ExperimentConfig config;
        if (!config_path.empty()) config = load_config(config_path);
        RunFlags flags;
        flags.seed = resolve_seed(config.seed, seed);
        flags.jobs = jobs;
        flags.force = force;
        flags.out_dir = out_dir.empty() ? config.out_dir : out_dir;

        if (verify->parsed()) return cmd_verify_assumptions(config, flags, out);
        if (oracles->parsed()) return cmd_run_oracles(config, flags, out);
        return cmd_run_representation(config, flags, out);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    } catch (const ParameterError& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace bsderep::cli
