#include "bsderep_cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bsderep/errors.hpp"

namespace bsderep::cli {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out = "invalid config";
    for (const auto& l : lines) out += "\n  " + l;
    return out;
}

// Walks the document, collecting every problem instead of stopping at the first.
class Checker {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) { errors.push_back((path.empty() ? "/" : path) + ": " + msg); }

    bool object(const json& j, const std::string& path, std::set<std::string> keys) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        for (const auto& [k, v] : j.items()) {
            if (!keys.count(k)) fail(path + "/" + k, "unknown key");
        }
        return true;
    }

    std::optional<double> number(const json& j, const std::string& path, bool positive = false,
                                 bool nonnegative = false) {
        if (!j.is_number()) {
            fail(path, "expected a number");
            return std::nullopt;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            fail(path, "must be finite");
            return std::nullopt;
        }
        if (positive && !(v > 0.0)) {
            fail(path, "must be > 0");
            return std::nullopt;
        }
        if (nonnegative && v < 0.0) {
            fail(path, "must be >= 0");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> count(const json& j, const std::string& path, std::uint64_t min = 0) {
        if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
            fail(path, "expected a nonnegative integer");
            return std::nullopt;
        }
        const auto v = j.get<std::uint64_t>();
        if (v < min) {
            fail(path, "must be >= " + std::to_string(min));
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string(const json& j, const std::string& path) {
        if (!j.is_string()) {
            fail(path, "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json& j, const std::string& path, bool nonempty) {
        if (!j.is_array()) {
            fail(path, "expected an array of numbers");
            return std::nullopt;
        }
        if (nonempty && j.empty()) {
            fail(path, "must not be empty");
            return std::nullopt;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto v = number(j[i], path + "/" + std::to_string(i));
            if (v) out.push_back(*v);
            else ok = false;
        }
        if (!ok) return std::nullopt;
        return out;
    }
};

template <typename T, typename U>
void assign(T& dst, const std::optional<U>& v) {
    if (v) dst = static_cast<T>(*v);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error(join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

void ExperimentConfig::require_target() const {
    std::vector<std::string> missing;
    if (!family) missing.push_back("/generator/family: required");
    if (!y) missing.push_back("/target/y: required");
    if (z.empty()) missing.push_back("/target/z: required");
    if (!missing.empty()) throw ConfigError(missing);
}

GeneratorSpec ExperimentConfig::generator() const {
    require_target();
    return make_generator(*family, params, z.size());
}

RepresentationProblem ExperimentConfig::problem() const {
    RepresentationProblem p;
    p.t = t;
    p.y = *y;
    p.z = z;
    p.spec = generator();
    p.mode = mode;
    return p;
}

ExperimentConfig parse_config(const json& doc) {
    Checker c;
    ExperimentConfig cfg;
    if (!c.object(doc, "", {"schema_version", "generator", "target", "mode", "ladder", "solver", "seed",
                            "outer_seeds", "compliance", "oracles", "output"})) {
        throw ConfigError(c.errors);
    }

    if (!doc.contains("schema_version")) {
        c.fail("/schema_version", "required");
    } else if (auto v = c.count(doc["schema_version"], "/schema_version"); v && *v != kSchemaVersion) {
        c.fail("/schema_version", "unsupported version " + std::to_string(*v) + " (expected " +
                                      std::to_string(kSchemaVersion) + ")");
    }

    if (doc.contains("generator")) {
        const auto& g = doc["generator"];
        if (c.object(g, "/generator", {"family", "params", "b", "horizon"})) {
            if (g.contains("family")) cfg.family = c.string(g["family"], "/generator/family");
            else c.fail("/generator/family", "required");
            if (g.contains("params") && c.object(g["params"], "/generator/params", {"a", "c", "gamma", "amp"})) {
                for (const auto& [k, v] : g["params"].items()) {
                    if (auto x = c.number(v, "/generator/params/" + k)) cfg.params.scalars[k] = *x;
                }
            }
            if (g.contains("b")) assign(cfg.params.b, c.numbers(g["b"], "/generator/b", true));
            if (g.contains("horizon")) assign(cfg.params.horizon, c.number(g["horizon"], "/generator/horizon", true));
        }
    }

    if (doc.contains("target")) {
        const auto& t = doc["target"];
        if (c.object(t, "/target", {"t", "y", "z"})) {
            if (t.contains("t")) assign(cfg.t, c.number(t["t"], "/target/t", false, true));
            if (t.contains("y")) cfg.y = c.number(t["y"], "/target/y");
            if (t.contains("z")) assign(cfg.z, c.numbers(t["z"], "/target/z", true));
        }
    }

    if (doc.contains("mode")) {
        if (auto m = c.string(doc["mode"], "/mode")) {
            try {
                cfg.mode = parse_mode(*m);
            } catch (const ParameterError& e) {
                c.fail("/mode", e.what());
            }
        }
    }

    if (doc.contains("ladder")) {
        const auto& l = doc["ladder"];
        if (c.object(l, "/ladder", {"epsilons", "paths", "steps"})) {
            std::size_t paths = 100000;
            if (l.contains("paths")) assign(paths, c.count(l["paths"], "/ladder/paths", 2));
            std::vector<double> eps;
            for (const auto& r : cfg.ladder.rungs) eps.push_back(r.epsilon);
            if (l.contains("epsilons")) assign(eps, c.numbers(l["epsilons"], "/ladder/epsilons", true));
            cfg.ladder = make_ladder(eps, paths);
            if (l.contains("steps")) {
                const auto& s = l["steps"];
                if (s.is_array()) {
                    if (s.size() != eps.size()) c.fail("/ladder/steps", "needs one entry per epsilon");
                    for (std::size_t i = 0; i < s.size() && i < eps.size(); ++i) {
                        assign(cfg.ladder.rungs[i].steps, c.count(s[i], "/ladder/steps/" + std::to_string(i), 1));
                    }
                } else if (auto n = c.count(s, "/ladder/steps", 1)) {
                    for (auto& r : cfg.ladder.rungs) r.steps = *n;
                }
            }
        }
    }

    if (doc.contains("solver")) {
        const auto& s = doc["solver"];
        if (c.object(s, "/solver", {"scheme", "picard_iters", "basis_degree", "z_cap", "tolerance"})) {
            if (s.contains("scheme")) {
                if (auto name = c.string(s["scheme"], "/solver/scheme")) {
                    try {
                        cfg.solver.scheme = parse_scheme(*name);
                    } catch (const ParameterError& e) {
                        c.fail("/solver/scheme", e.what());
                    }
                }
            }
            if (s.contains("picard_iters")) assign(cfg.solver.picard_iters, c.count(s["picard_iters"], "/solver/picard_iters", 1));
            if (s.contains("basis_degree")) assign(cfg.solver.basis_degree, c.count(s["basis_degree"], "/solver/basis_degree", 1));
            if (s.contains("z_cap") && !s["z_cap"].is_null()) {
                if (auto v = c.number(s["z_cap"], "/solver/z_cap", true)) cfg.solver.z_cap = *v;
            }
            if (s.contains("tolerance")) assign(cfg.solver.tolerance, c.number(s["tolerance"], "/solver/tolerance", true));
        }
    }

    if (doc.contains("seed")) assign(cfg.seed, c.count(doc["seed"], "/seed"));
    if (doc.contains("outer_seeds")) assign(cfg.outer_seeds, c.count(doc["outer_seeds"], "/outer_seeds"));

    if (doc.contains("compliance")) {
        const auto& s = doc["compliance"];
        if (c.object(s, "/compliance", {"samples", "y_max", "z_max", "h3_tolerance"})) {
            if (s.contains("samples")) assign(cfg.compliance.samples, c.count(s["samples"], "/compliance/samples", 1));
            if (s.contains("y_max")) assign(cfg.compliance.y_max, c.number(s["y_max"], "/compliance/y_max", true));
            if (s.contains("z_max")) assign(cfg.compliance.z_max, c.number(s["z_max"], "/compliance/z_max", true));
            if (s.contains("h3_tolerance"))
                assign(cfg.compliance.h3_tolerance, c.number(s["h3_tolerance"], "/compliance/h3_tolerance", true));
        }
    }

    if (doc.contains("oracles")) {
        const auto& o = doc["oracles"];
        auto& oc = cfg.oracles;
        if (c.object(o, "/oracles", {"tolerance_sigmas", "absolute_tolerance", "tolerance", "nested", "lsmc_paths",
                                     "lsmc_steps", "pde_space_intervals"})) {
            if (o.contains("tolerance_sigmas"))
                assign(oc.tolerance_sigmas, c.number(o["tolerance_sigmas"], "/oracles/tolerance_sigmas", false, true));
            if (o.contains("absolute_tolerance"))
                assign(oc.absolute_tolerance, c.number(o["absolute_tolerance"], "/oracles/absolute_tolerance", false, true));
            if (o.contains("tolerance") && !o["tolerance"].is_null()) {
                if (auto v = c.number(o["tolerance"], "/oracles/tolerance", false, true)) oc.fixed_tolerance = *v;
            }
            if (o.contains("nested")) {
                const auto& n = o["nested"];
                if (c.object(n, "/oracles/nested", {"outer", "inner", "steps", "budget"})) {
                    if (n.contains("outer")) assign(oc.nested.outer, c.count(n["outer"], "/oracles/nested/outer", 2));
                    if (n.contains("inner")) assign(oc.nested.inner, c.count(n["inner"], "/oracles/nested/inner", 2));
                    if (n.contains("steps")) assign(oc.nested.steps, c.count(n["steps"], "/oracles/nested/steps", 1));
                    if (n.contains("budget")) assign(oc.nested.budget, c.number(n["budget"], "/oracles/nested/budget", true));
                }
            }
            if (o.contains("lsmc_paths")) assign(oc.lsmc_paths, c.count(o["lsmc_paths"], "/oracles/lsmc_paths", 2));
            if (o.contains("lsmc_steps")) assign(oc.lsmc_steps, c.count(o["lsmc_steps"], "/oracles/lsmc_steps", 1));
            if (o.contains("pde_space_intervals"))
                assign(oc.pde_space_intervals, c.count(o["pde_space_intervals"], "/oracles/pde_space_intervals", 4));
        }
    }

    if (doc.contains("output")) {
        const auto& o = doc["output"];
        if (c.object(o, "/output", {"dir"}) && o.contains("dir")) assign(cfg.out_dir, c.string(o["dir"], "/output/dir"));
    }

    // Semantic checks that need the generator: family parameters, horizon, ladder range.
    if (c.errors.empty() && cfg.has_target()) {
        try {
            const auto spec = cfg.generator();
            try {
                cfg.ladder.validate(cfg.t, spec.horizon);
            } catch (const ParameterError& e) {
                c.fail("/ladder", e.what());
            }
            try {
                cfg.problem().validate();
            } catch (const ParameterError& e) {
                c.fail("/target", e.what());
            }
        } catch (const ParameterError& e) {
            c.fail("/generator", e.what());
        }
    }
    if (c.errors.empty()) {
        try {
            cfg.solver.validate();
        } catch (const ParameterError& e) {
            c.fail("/solver", e.what());
        }
    }
    if (!c.errors.empty()) throw ConfigError(c.errors);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open config file"});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({path + ": " + e.what()});
    }
    return parse_config(doc);
}

std::uint64_t resolve_seed(std::uint64_t config_seed, std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("BSDE_REP_SEED"); env && *env) {
        std::istringstream is(env);
        std::uint64_t v = 0;
        char extra = 0;
        if (env[0] == '-' || !(is >> v) || (is >> extra)) {
            throw ConfigError({std::string("BSDE_REP_SEED: not an unsigned integer: '") + env + "'"});
        }
        return v;
    }
    return config_seed;
}

}  // namespace bsderep::cli
