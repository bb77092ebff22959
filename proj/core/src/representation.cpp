#include "bsderep/representation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bsderep/errors.hpp"
#include "bsderep/parallel.hpp"

namespace bsderep {

const char* to_string(LimitMode m) { return m == LimitMode::L1 ? "L1" : "pointwise"; }

LimitMode parse_mode(const std::string& name) {
    if (name == "L1" || name == "l1") return LimitMode::L1;
    if (name == "pointwise") return LimitMode::Pointwise;
    throw ParameterError("unknown mode '" + name + "' (expected L1 or pointwise)");
}

void RepresentationProblem::validate() const {
    spec.validate();
    if (z.empty()) throw ParameterError("target z must have at least one component");
    if (!(t >= 0.0) || !(t < spec.horizon)) throw ParameterError("target time must lie in [0, T)");
    if (!std::isfinite(y)) throw ParameterError("target y must be finite");
    if (mode == LimitMode::Pointwise && !spec.phi.hinf_declared) {
        throw ParameterError("pointwise mode needs phi(x) declared in H^inf");
    }
    if (mode == LimitMode::L1 && !spec.phi.square_integrable_declared) {
        throw ParameterError("L1 mode needs phi(x) declared square-integrable");
    }
}

void EpsilonLadder::validate(double t, double horizon) const {
    if (rungs.empty()) throw ParameterError("ladder has no rungs");
    const double upper = std::min(horizon - t, 1.0);
    for (std::size_t r = 0; r < rungs.size(); ++r) {
        const auto& rung = rungs[r];
        if (!(rung.epsilon > 0.0) || rung.epsilon > upper) {
            std::ostringstream os;
            os << "ladder epsilon " << rung.epsilon << " outside (0, (T-t)^1] = (0, " << upper << "]";
            throw ParameterError(os.str());
        }
        if (r > 0 && !(rung.epsilon < rungs[r - 1].epsilon)) {
            throw ParameterError("ladder epsilons must be strictly decreasing");
        }
        if (rung.steps == 0 || rung.paths < 2) throw ParameterError("each rung needs steps >= 1 and paths >= 2");
    }
}

std::size_t default_steps(double epsilon) {
    const auto scaled = static_cast<std::size_t>(std::ceil(64.0 * epsilon / 0.125 - 1e-9));
    return std::max<std::size_t>(32, scaled);
}

EpsilonLadder make_ladder(const std::vector<double>& epsilons, std::size_t paths) {
    EpsilonLadder ladder;
    for (double e : epsilons) ladder.rungs.push_back({e, default_steps(e), paths});
    return ladder;
}

EpsilonLadder default_ladder(std::size_t paths) {
    std::vector<double> eps;
    for (int k = 3; k <= 8; ++k) eps.push_back(std::ldexp(1.0, -k));
    return make_ladder(eps, paths);
}

TildeProcesses tilde_transform(const BsdeSolution& solution, const PathBatch& batch, double y,
                               std::span<const double> z, double k) {
    const std::size_t n = batch.size();
    const std::size_t nodes = batch.grid().nodes();
    const std::size_t d = batch.dimension();
    if (solution.n_paths != n || solution.n_nodes != nodes || z.size() != d) {
        throw ParameterError("tilde transform: solution, batch and z are not aligned");
    }
    TildeProcesses t;
    t.n_paths = n;
    t.n_nodes = nodes;
    t.dimension = d;
    t.k = k;
    t.Y.resize(n * nodes);
    t.Z.assign(n * nodes * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nodes; ++j) {
            const double v = solution.y(i, j) - y - dot(z, batch.frozen_displacement(i, j));
            t.Y[i * nodes + j] = v;
            t.max_abs_y = std::max(t.max_abs_y, std::abs(v));
            if (std::abs(v) > 1.05 * k) ++t.k_exceedances;
            if (j + 1 == nodes) continue;  // Z has no value at the terminal node
            const bool before = batch.active(i, j);
            const auto zs = solution.z(i, j);
            for (std::size_t c = 0; c < d; ++c) t.Z[(i * nodes + j) * d + c] = zs[c] - (before ? z[c] : 0.0);
        }
    }
    return t;
}

SqrtEpsCheck sqrt_eps_bound_check(const TildeProcesses& tilde, const GrowthEnvelope& envelope, double epsilon,
                                  double slack) {
    SqrtEpsCheck out;
    out.sup_abs = tilde.max_abs_y;
    out.bound = std::sqrt(epsilon) * envelope.C;
    out.ratio = out.sup_abs / out.bound;
    out.passed = out.sup_abs <= out.bound * (1.0 + slack);
    return out;
}

namespace {

std::pair<double, double> mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace

Prop32Diagnostics prop32_diagnostics(const TildeProcesses& tilde, const TimeGrid& grid) {
    const std::size_t N = grid.steps();
    if (tilde.n_nodes != N + 1) throw ParameterError("prop32: grid does not match the tilde processes");
    std::vector<double> ys(tilde.n_paths), zs(tilde.n_paths);
    for (std::size_t i = 0; i < tilde.n_paths; ++i) {
        double ay = 0.0, az = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            ay += std::abs(tilde.y(i, j));
            const auto z = tilde.z(i, j);
            az += dot(z, z);
        }
        // (1/ε) Σ_j |·| Δ = mean over the left endpoints
        ys[i] = ay / static_cast<double>(N);
        zs[i] = az / static_cast<double>(N);
    }
    Prop32Diagnostics out;
    std::tie(out.y_mean, out.y_se) = mean_se(ys);
    std::tie(out.z_mean, out.z_se) = mean_se(zs);
    out.y_conditional = out.y_mean;
    out.z_conditional = out.z_mean;
    return out;
}

QuotientDecomposition quotient_decomposition_diagnostic(const RepresentationProblem& problem,
                                                        const PathBatch& batch, double g_hat) {
    const std::size_t N = batch.grid().steps();
    const std::size_t d = batch.dimension();
    std::vector<double> per(batch.size());
    std::vector<double> zero(d, 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < N && batch.active(i, j); ++j) {
            const auto ctx = batch.context(i, j);
            acc += problem.spec(ctx, problem.y + dot(problem.z, ctx.displacement), problem.z);
        }
        per[i] = acc / static_cast<double>(N);
    }
    QuotientDecomposition out;
    std::tie(out.n_term, out.n_se) = mean_se(per);
    out.m_term = g_hat;
    out.g_tilde_t = problem.spec(PathContext{batch.grid().t0(), batch.base(), zero}, problem.y, problem.z);
    out.m_minus_n = std::abs(out.m_term - out.n_term);
    out.n_minus_g = std::abs(out.n_term - out.g_tilde_t);
    return out;
}

bool RepresentationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

double fit_log_slope(std::span<const double> epsilons, std::span<const double> errors) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(errors[i] > 0.0) || !(epsilons[i] > 0.0)) continue;
        const double x = std::log(epsilons[i]), yv = std::log(errors[i]);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
        n += 1;
    }
    if (n < 2) return 0.0;
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool all_finite(const RungReport& r) {
    for (double v : {r.g_hat, r.se, r.abs_err, r.l1_err, r.excess_err, r.max_run_err, r.sup_ytilde, r.sqrt_eps_c,
                     r.sup_ytilde_ratio, r.ratio_se, r.max_abs_y, r.apriori_bound, r.max_abs_ytilde, r.k, r.K,
                     r.prop32_y, r.prop32_y_se, r.prop32_z, r.prop32_z_se, r.m_term, r.n_term, r.m_minus_n,
                     r.n_minus_g, r.barrier_bound, r.stopped_fraction, r.max_overshoot, r.residual}) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// Monotone-within-noise check on a column, ε decreasing along `rungs`.
InvariantCheck decay_check(const std::string& name, const std::vector<RungReport>& rungs,
                           double RungReport::*value, double RungReport::*se) {
    InvariantCheck c{name, true, ""};
    for (std::size_t r = 1; r < rungs.size(); ++r) {
        const double prev = rungs[r - 1].*value, cur = rungs[r].*value;
        const double slack = 2.0 * std::hypot(rungs[r - 1].*se, rungs[r].*se) + 1e-12;
        if (cur > prev + slack) {
            c.passed = false;
            c.detail += "increase at eps=" + fmt(rungs[r].epsilon) + " (" + fmt(prev) + " -> " + fmt(cur) + "); ";
        }
    }
    if (rungs.size() >= 2) {
        const double first = rungs.front().*value, last = rungs.back().*value;
        if (last > 0.1 * first + 1e-12) {
            c.passed = false;
            c.detail += "final " + fmt(last) + " > 0.1 x first " + fmt(first);
        }
    }
    if (c.passed) c.detail = "ok";
    return c;
}

}  // namespace

std::vector<InvariantCheck> evaluate_invariants(const RepresentationReport& report) {
    std::vector<InvariantCheck> out;
    const auto& rungs = report.rungs;
    if (rungs.empty()) return {{"non-empty", false, "no rungs"}};

    {
        InvariantCheck c{"finite", true, "ok"};
        for (const auto& r : rungs) {
            if (!all_finite(r)) {
                c.passed = false;
                c.detail = "non-finite entry at eps=" + fmt(r.epsilon);
            }
        }
        out.push_back(c);
    }
    {
        const auto& last = rungs.back();
        const auto& first = rungs.front();
        const double tol = 0.05 * (1.0 + std::abs(report.g_target)) + 3.0 * last.se;
        InvariantCheck c{"convergence", true, ""};
        std::ostringstream os;
        os << "|err|=" << fmt(last.abs_err) << " tol=" << fmt(tol) << " order=" << fmt(report.fitted_order);
        if (!(last.abs_err <= tol)) c.passed = false;
        const bool noise_level = first.abs_err <= 3.0 * first.se;
        if (!(report.fitted_order > 0.0) && !noise_level) c.passed = false;
        if (noise_level) os << " (errors at noise level)";
        c.detail = os.str();
        out.push_back(c);
    }
    {
        InvariantCheck c{"apriori-bound", true, "ok"};
        for (const auto& r : rungs) {
            if (r.max_abs_y > 1.05 * r.apriori_bound + 3.0 * r.se * r.epsilon) {
                c.passed = false;
                c.detail = "max|Y|=" + fmt(r.max_abs_y) + " > bound " + fmt(r.apriori_bound) + " at eps=" + fmt(r.epsilon);
            }
        }
        out.push_back(c);
    }
    {
        InvariantCheck c{"k-bound", true, "ok"};
        for (const auto& r : rungs) {
            if (r.max_abs_ytilde > 1.05 * r.k) {
                c.passed = false;
                c.detail = "max|Ytilde|=" + fmt(r.max_abs_ytilde) + " > 1.05k at eps=" + fmt(r.epsilon);
            }
        }
        out.push_back(c);
    }
    {
        InvariantCheck c{"sqrt-eps-bound", true, "ok"};
        for (const auto& r : rungs) {
            if (r.sup_ytilde_ratio > 1.05) {
                c.passed = false;
                c.detail = "ratio " + fmt(r.sup_ytilde_ratio) + " at eps=" + fmt(r.epsilon);
            }
        }
        out.push_back(c);
    }
    {
        InvariantCheck c{"sqrt-eps-ratio-monotone", true, "ok"};
        for (std::size_t r = 1; r < rungs.size(); ++r) {
            const double slack = 2.0 * std::hypot(rungs[r - 1].ratio_se, rungs[r].ratio_se);
            if (rungs[r].sup_ytilde_ratio > rungs[r - 1].sup_ytilde_ratio + slack) {
                c.passed = false;
                c.detail = "ratio rises at eps=" + fmt(rungs[r].epsilon);
            }
        }
        out.push_back(c);
    }
    out.push_back(decay_check("prop32-y-decay", rungs, &RungReport::prop32_y, &RungReport::prop32_y_se));
    out.push_back(decay_check("prop32-z-decay", rungs, &RungReport::prop32_z, &RungReport::prop32_z_se));
    if (report.mode == LimitMode::Pointwise) {
        InvariantCheck c{"per-run-convergence", true, "ok"};
        for (std::size_t r = 1; r < rungs.size(); ++r) {
            if (rungs[r].excess_err > rungs[r - 1].excess_err + 1e-12) {
                c.passed = false;
                c.detail = "per-run excess error grows at eps=" + fmt(rungs[r].epsilon);
            }
        }
        out.push_back(c);
    }
    return out;
}

RepresentationReport run_representation(const RepresentationProblem& problem, const EpsilonLadder& ladder,
                                        const SolverConfig& config, const RepresentationOptions& options) {
    problem.validate();
    ladder.validate(problem.t, problem.spec.horizon);
    config.validate();
    if (config.scheme != Scheme::PicardLsmc) {
        throw ParameterError("the representation harness needs per-path (Y, Z); use scheme picard-lsmc");
    }
    const auto& spec = problem.spec;
    const std::size_t d = problem.z.size();
    const unsigned jobs = config.jobs ? config.jobs : default_jobs();

    if (options.compliance_samples > 0) {
        DomainSampler sampler;
        sampler.t_max = std::min(spec.horizon, 1.0);
        std::vector<ComplianceReport> reports{check_h1(spec, sampler, options.compliance_samples, d),
                                              check_h2(spec, sampler, options.compliance_samples, d)};
        if (!reports[0].passed() || !reports[1].passed()) {
            throw ComplianceError("generator '" + spec.name + "' fails the sampled (H1)/(H2) check", reports);
        }
    }

    const auto env = derive_envelope(spec, problem.y, problem.z);
    const double apriori = apriori_bound(std::abs(problem.y) + env.z_norm, spec.f.integral_bound,
                                         spec.u.integral_bound);
    const auto base = sample_prefix(problem.t, d, options.seed);
    const std::vector<double> zero(d, 0.0);

    RepresentationReport report;
    report.generator = spec.name;
    report.mode = problem.mode;
    report.t = problem.t;
    report.y = problem.y;
    report.z = problem.z;
    report.seed = options.seed;
    report.g_target = spec(PathContext{problem.t, base, zero}, problem.y, problem.z);
    const std::size_t R = options.outer_seeds ? options.outer_seeds : (spec.path_dependent ? 16 : 1);

    StoppingIntegrand phi_at_K = [env](const PathContext& ctx) { return env.phi_at_K(ctx); };

    for (std::size_t ri = 0; ri < ladder.rungs.size(); ++ri) {
        const auto& rung = ladder.rungs[ri];
        const std::size_t per = std::max<std::size_t>(rung.paths / R, 2);
        RungReport rr;
        rr.epsilon = rung.epsilon;
        rr.steps = rung.steps;
        rr.paths = per * R;
        rr.replicates = R;
        rr.k = env.k;
        rr.K = env.K;
        rr.apriori_bound = apriori;
        rr.sqrt_eps_c = std::sqrt(rung.epsilon) * env.C;
        rr.barrier_bound = barrier_neglect_bound(d, rung.epsilon);
        double se2 = 0, py_se2 = 0, pz_se2 = 0, y0_se_max = 0;
        bool degree_fallback = false;
        try {
            const auto grid = make_grid(problem.t, rung.epsilon, rung.steps, spec.horizon);
            for (std::size_t r = 0; r < R; ++r) {
                const auto seed = stream_seed(stream_seed(options.seed, ri), r);
                auto batch = hitting_time(sample_brownian(grid, d, seed, per, base, jobs), phi_at_K, jobs);
                const auto terminal = stopped_terminal(batch, problem.y, problem.z);
                const auto sol = solve(spec.eval, terminal, batch, config, apriori);
                const double q = (sol.y0 - problem.y) / rung.epsilon;
                const double qse = sol.y0_se / rung.epsilon;
                const auto tilde = tilde_transform(sol, batch, problem.y, problem.z, env.k);
                const auto sq = sqrt_eps_bound_check(tilde, env, rung.epsilon);
                const auto p32 = prop32_diagnostics(tilde, grid);
                const auto dec = quotient_decomposition_diagnostic(problem, batch, q);

                const double err = std::abs(q - report.g_target);
                rr.g_hat += q / R;
                se2 += qse * qse;
                rr.l1_err += err / R;
                rr.excess_err = std::max(rr.excess_err, std::max(0.0, err - 3.0 * qse));
                rr.max_run_err = std::max(rr.max_run_err, err);
                rr.sup_ytilde = std::max(rr.sup_ytilde, sq.sup_abs);
                rr.max_abs_y = std::max(rr.max_abs_y, sol.max_abs_y());
                rr.max_abs_ytilde = std::max(rr.max_abs_ytilde, tilde.max_abs_y);
                rr.prop32_y += p32.y_mean / R;
                rr.prop32_z += p32.z_mean / R;
                py_se2 += p32.y_se * p32.y_se;
                pz_se2 += p32.z_se * p32.z_se;
                rr.n_term += dec.n_term / R;
                rr.stopped_fraction += batch.stopped_fraction() / R;
                rr.max_overshoot = std::max(rr.max_overshoot, batch.max_overshoot());
                rr.residual = std::max(rr.residual, sol.residual);
                rr.converged = rr.converged && sol.converged;
                rr.z_cap_hits += sol.z_cap_hits;
                y0_se_max = std::max(y0_se_max, sol.y0_se);
                for (const auto& w : sol.warnings) degree_fallback = degree_fallback || w.find("degree") != std::string::npos;
            }
        } catch (const ParameterError&) {
            throw;
        } catch (const BsdeError& e) {
            rr.converged = false;
            rr.g_hat = std::numeric_limits<double>::quiet_NaN();
            rr.flags.push_back("solver-error");
        }
        rr.se = std::sqrt(se2) / R;
        rr.prop32_y_se = std::sqrt(py_se2) / R;
        rr.prop32_z_se = std::sqrt(pz_se2) / R;
        rr.abs_err = std::abs(rr.g_hat - report.g_target);
        rr.sup_ytilde_ratio = rr.sup_ytilde / rr.sqrt_eps_c;
        rr.ratio_se = y0_se_max / rr.sqrt_eps_c;
        rr.m_term = rr.g_hat;
        rr.m_minus_n = std::abs(rr.m_term - rr.n_term);
        rr.n_minus_g = std::abs(rr.n_term - report.g_target);

        if (!rr.converged) rr.flags.push_back("picard-unconverged");
        if (rr.max_abs_ytilde > 1.05 * rr.k) rr.flags.push_back("k-exceeded");
        if (rr.sup_ytilde_ratio > 1.05) rr.flags.push_back("sqrt-eps-bound");
        if (rr.max_abs_y > 1.05 * apriori) rr.flags.push_back("apriori-bound");
        if (rr.z_cap_hits) rr.flags.push_back("z-cap");
        if (degree_fallback) rr.flags.push_back("degree-fallback");
        report.all_converged = report.all_converged && rr.converged;
        report.rungs.push_back(std::move(rr));
    }

    // Slope over the rungs whose error is resolved above the noise; the
    // noise-floored rungs carry no information about the order.
    std::vector<double> eps, errs;
    for (const auto& r : report.rungs) {
        if (r.abs_err > 2.0 * r.se) {
            eps.push_back(r.epsilon);
            errs.push_back(r.abs_err);
        }
    }
    if (eps.size() < 2) {
        eps.clear();
        errs.clear();
        for (const auto& r : report.rungs) {
            eps.push_back(r.epsilon);
            errs.push_back(r.abs_err);
        }
    }
    report.fitted_order = fit_log_slope(eps, errs);
    report.checks = evaluate_invariants(report);
    return report;
}

namespace {

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_flags(const std::vector<std::string>& flags) {
    if (flags.empty()) return "none";
    std::string s;
    for (const auto& f : flags) s += (s.empty() ? "" : ";") + f;
    return s;
}

}  // namespace

void write_report_csv(const RepresentationReport& report, std::ostream& out) {
    out << "epsilon,g_hat,se,abs_err,sup_ytilde_ratio,prop32_y,prop32_z,flags\n";
    for (const auto& r : report.rungs) {
        out << g17(r.epsilon) << ',' << g17(r.g_hat) << ',' << g17(r.se) << ',' << g17(r.abs_err) << ','
            << g17(r.sup_ytilde_ratio) << ',' << g17(r.prop32_y) << ',' << g17(r.prop32_z) << ','
            << join_flags(r.flags) << '\n';
    }
}

void write_report_detail_csv(const RepresentationReport& report, std::ostream& out) {
    out << "epsilon,steps,paths,replicates,g_hat,se,abs_err,l1_err,excess_err,max_run_err,sup_ytilde,sqrt_eps_c,"
           "sup_ytilde_ratio,ratio_se,max_abs_y,apriori_bound,max_abs_ytilde,k,K,prop32_y,prop32_y_se,prop32_z,"
           "prop32_z_se,m_term,n_term,m_minus_n,n_minus_g,barrier_bound,stopped_fraction,max_overshoot,residual,"
           "converged,z_cap_hits,flags\n";
    for (const auto& r : report.rungs) {
        out << g17(r.epsilon) << ',' << r.steps << ',' << r.paths << ',' << r.replicates;
        for (double v : {r.g_hat, r.se, r.abs_err, r.l1_err, r.excess_err, r.max_run_err, r.sup_ytilde, r.sqrt_eps_c,
                         r.sup_ytilde_ratio, r.ratio_se, r.max_abs_y, r.apriori_bound, r.max_abs_ytilde, r.k, r.K,
                         r.prop32_y, r.prop32_y_se, r.prop32_z, r.prop32_z_se, r.m_term, r.n_term, r.m_minus_n,
                         r.n_minus_g, r.barrier_bound, r.stopped_fraction, r.max_overshoot, r.residual}) {
            out << ',' << g17(v);
        }
        out << ',' << (r.converged ? 1 : 0) << ',' << r.z_cap_hits << ',' << join_flags(r.flags) << '\n';
    }
}

}  // namespace bsderep
