#include "msl/pipelines.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "msl/errors.hpp"
#include "msl/svg.hpp"

namespace msl {

namespace {

using nlohmann::json;

// Runs f(0..n-1) on up to `jobs` threads; results keep index order and the
// lowest-index exception is rethrown.
template <class F>
auto parallel_map(std::size_t n, int jobs, F f) -> std::vector<decltype(f(std::size_t{0}))> {
    using T = decltype(f(std::size_t{0}));
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(n);
    for (auto &s : slots)
        out.push_back(std::move(*s));
    return out;
}

std::string num(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json jcplx(cplx z) { return json::array({jnum(z.real()), jnum(z.imag())}); }

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json provenance(const ExperimentConfig &cfg) {
    return {{"tool", "multisum-lab"}, {"version", tool_version}, {"config_sha256", cfg.sha256}, {"generated", utc_now()}};
}

class Writer {
public:
    Writer(const ExperimentConfig &cfg, const RunOptions &opt, RunResult &res) : cfg_(cfg), opt_(opt), res_(res) {
        std::filesystem::create_directories(opt.out_dir);
    }

    void text(const std::string &name, const std::string &body) {
        const auto path = opt_.out_dir / name;
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw config_error("cannot write `" + path.string() + "`");
        out << body;
        res_.files.push_back(path);
    }
    void csv(const std::string &name, const std::string &body) { text(name, provenance_line(cfg_) + "\n" + body); }
    void json_file(const std::string &name, json j) {
        j["provenance"] = provenance(cfg_);
        text(name, j.dump(2) + "\n");
    }

private:
    const ExperimentConfig &cfg_;
    const RunOptions &opt_;
    RunResult &res_;
};

const ProblemSpec &need_problem(const ExperimentConfig &cfg) {
    if (!cfg.problem)
        throw config_error("missing section [problem]");
    return *cfg.problem;
}

const CoveringConfig &need_covering(const ExperimentConfig &cfg) {
    if (!cfg.covering)
        throw config_error("missing section [covering]");
    return *cfg.covering;
}

void need_eps(const ExperimentConfig &cfg) {
    if (cfg.grids.eps_moduli.empty())
        throw config_error("missing `eps` grid in [grids]");
}

double rho0_of(const ExperimentConfig &cfg) { return cfg.covering ? cfg.covering->rho0 : 0.3; }

json flatness_json(const FlatnessReport &r) { return json::parse(to_json(r)); }

std::vector<std::pair<double, double>> envelope_curve(const FlatnessReport &r, const SequenceSpec *seq) {
    std::vector<std::pair<double, double>> pts;
    if (r.model == FlatnessModel::none || !(r.eps_min > 0))
        return pts;
    for (int j = 0; j <= 60; ++j) {
        const double e = r.eps_min * std::pow(r.eps_max / r.eps_min, j / 60.0);
        double v = 0.0;
        if (r.model == FlatnessModel::gevrey)
            v = r.K1 * std::exp(-r.M1 / std::pow(e, r.alpha));
        else if (seq)
            v = r.C * std::exp(log_h_m(*seq, r.K * e));
        pts.emplace_back(e, v);
    }
    return pts;
}

const char *palette(std::size_t i) {
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    return colors[i % 6];
}

} // namespace

std::string provenance_line(const ExperimentConfig &cfg) {
    return "# generated " + utc_now() + " by multisum-lab " + tool_version + " config-sha256 " + cfg.sha256;
}

RunResult cmd_check_sequence(const ExperimentConfig &cfg, const RunOptions &opt) {
    if (!cfg.seq)
        throw config_error("missing section [sequence]");
    const SequenceSpec &seq = *cfg.seq;
    RunResult res;
    Writer w(cfg, opt, res);

    const std::size_t p_max = std::min(cfg.grids.p_max_regularity, seq.p_limit());
    const RegularityReport rep = check_strong_regularity(seq, p_max);
    json j;
    j["sequence"] = seq.describe();
    j["p_max"] = rep.p_max;
    j["scope"] = rep.scope;
    j["alpha0"] = rep.alpha0_ok ? "pass" : "fail";
    j["mu"] = rep.mu_ok ? "pass" : "fail";
    j["gamma1"] = rep.gamma1_ok ? "pass" : "fail";
    j["witness_a"] = jnum(rep.witness_a);
    j["witness_b_range"] = jnum(rep.witness_b_range);
    j["witness_b"] = jnum(rep.witness_b);
    j["failures"] = json::array();
    for (std::size_t i = 0; i < rep.failures.size() && i < 50; ++i)
        j["failures"].push_back(
            {{"axiom", rep.failures[i].axiom}, {"p", rep.failures[i].p}, {"detail", rep.failures[i].detail}});
    j["failure_count"] = rep.failures.size();

    const std::size_t n_max = std::min(cfg.grids.omega_n_max, seq.p_limit() - 1);
    try {
        const OmegaEstimate om = omega_estimate(seq, n_max);
        j["omega"] = {{"value", jnum(om.value)}, {"error", jnum(om.error)}, {"last_quotient", jnum(om.last_quotient)},
                      {"n_max", n_max}};
    } catch (const convergence_error &e) {
        j["omega"] = {{"value", nullptr}, {"note", e.what()}};
    } catch (const invalid_grid &e) {
        j["omega"] = {{"value", nullptr}, {"note", e.what()}};
    }

    std::ostringstream hm;
    hm << "t,h_m,argmin,log_h_m\n";
    std::size_t unbounded = 0;
    for (double t : cfg.grids.hm_t) {
        try {
            const HmValue v = h_m_scan(seq, t);
            hm << num(t) << ',' << num(v.value) << ',' << v.argmin << ',' << num(v.log_value) << '\n';
        } catch (const unbounded_scan &) {
            ++unbounded;
            hm << num(t) << ",nan,,nan\n";
        }
    }
    if (unbounded)
        j["hm_note"] = std::to_string(unbounded) + " grid values have no turning point within the scan range";
    w.csv("hm.csv", hm.str());
    w.json_file("sequence_report.json", j);
    res.messages.push_back("sequence " + seq.describe() + ": alpha0 " + j["alpha0"].get<std::string>() + ", mu " +
                           j["mu"].get<std::string>() + ", gamma1 " + j["gamma1"].get<std::string>());
    return res;
}

RunResult cmd_solve(const ExperimentConfig &cfg, const RunOptions &opt) {
    const ProblemSpec &spec = need_problem(cfg);
    need_eps(cfg);
    if (cfg.kernel)
        throw config_error("solve needs initial data; a rational kernel config is evaluation-only");
    validate_config(cfg);
    RunResult res;
    Writer w(cfg, opt, res);
    const WeightParams wp = WeightParams::from(spec);
    const double rho0 = rho0_of(cfg);
    const std::size_t ns = cfg.sector_count();
    const std::size_t ne = cfg.grids.eps_moduli.size();

    struct Solved {
        BorelSolution sol;
        double residual;
        std::vector<NormRow> norms;
    };
    const auto t0 = std::chrono::steady_clock::now();
    auto solved = parallel_map(ns * ne, opt.jobs, [&](std::size_t idx) {
        const std::size_t i = idx / ne, j = idx % ne;
        const cplx eps = cfg.sector_eps(i)[j];
        Solved s{solve_recursion(spec, cfg.sectors[i], eps, cfg.grids.N_z, cfg.grids.N_tau), 0.0, {}};
        s.residual = borel_residual(spec, cfg.sectors[i], s.sol);
        s.norms = solution_norms(s.sol, wp, rho0);
        return s;
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    csv << "sector,beta,epsilon_re,epsilon_im,norm\n";
    json points = json::array();
    double worst = 0.0;
    std::vector<double> norm_max(static_cast<std::size_t>(cfg.grids.N_z + 1), 0.0);
    for (std::size_t idx = 0; idx < solved.size(); ++idx) {
        const std::size_t i = idx / ne, j = idx % ne;
        const auto &s = solved[idx];
        for (const auto &row : s.norms) {
            csv << i << ',' << row.beta << ',' << num(row.epsilon.real()) << ',' << num(row.epsilon.imag()) << ','
                << num(row.norm) << '\n';
            auto &m = norm_max[static_cast<std::size_t>(row.beta)];
            m = std::max(m, row.norm);
        }
        worst = std::max(worst, s.residual);
        points.push_back({{"sector", i}, {"epsilon", jcplx(s.sol.epsilon)}, {"residual", jnum(s.residual)}});
        std::ostringstream name;
        name << "series/sector" << i << "_eps" << std::setw(2) << std::setfill('0') << j << ".txt";
        w.text(name.str(), solution_to_text(s.sol));
    }
    w.csv("norms.csv", csv.str());

    json rep;
    rep["sectors"] = ns;
    rep["N_z"] = cfg.grids.N_z;
    rep["N_tau"] = cfg.grids.N_tau;
    rep["points"] = points;
    rep["max_residual"] = jnum(worst);
    rep["branch"] = solved.empty() ? "" : solved.front().sol.branch;
    rep["solve_seconds"] = seconds;

    if (cfg.run.majorant) {
        const DominationResult dom = find_dominating_constant(spec, cfg.run.c1, cfg.run.c2, norm_max);
        json m{{"found", dom.found}, {"c1", cfg.run.c1}, {"c2", cfg.run.c2}};
        std::ostringstream mcsv;
        mcsv << "beta,norm,u,envelope\n";
        if (dom.found) {
            m["C"] = dom.C;
            const int beta_env = std::max(40, cfg.run.majorant_beta);
            const auto init = std::span<const double>(norm_max).first(static_cast<std::size_t>(spec.S));
            const MajorantResult ext = majorant_coeffs(spec, cfg.run.c1, cfg.run.c2, init, beta_env, dom.C);
            const GeometricEnvelope env = fit_factorial_envelope(ext.u);
            m["Z0"] = jnum(env.Z0);
            m["Z1"] = jnum(env.Z1);
            m["envelope_verified"] = env.verified;
            m["envelope_beta_max"] = beta_env;
            m["warnings"] = ext.warnings;
            double fact = 1.0;
            for (int b = 0; b <= beta_env; ++b) {
                if (b > 0)
                    fact *= b;
                const std::size_t ub = static_cast<std::size_t>(b);
                mcsv << b << ',' << (ub < norm_max.size() ? num(norm_max[ub]) : std::string()) << ','
                     << num(ext.u[ub]) << ',' << num(env.Z1 * std::pow(env.Z0, b) * fact) << '\n';
            }
        }
        w.csv("majorant.csv", mcsv.str());
        rep["majorant"] = m;
    }

    if (cfg.seq && ns >= 2) {
        json cn = json::array();
        for (std::size_t i = 0; i < ns; ++i) {
            const std::size_t jn = (i + 1) % ns;
            const auto grid = cfg.overlap_eps(i);
            auto pairs = parallel_map(grid.size(), opt.jobs, [&](std::size_t q) {
                return std::pair{solve_recursion(spec, cfg.sectors[i], grid[q], cfg.grids.N_z, cfg.grids.N_tau),
                                 solve_recursion(spec, cfg.sectors[jn], grid[q], cfg.grids.N_z, cfg.grids.N_tau)};
            });
            const CocycleNormReport r = cocycle_norm_check(pairs, *cfg.seq, wp, rho0);
            cn.push_back({{"overlap", i},
                          {"degenerate", r.degenerate},
                          {"c0", jnum(r.c0)},
                          {"c1", jnum(r.c1)},
                          {"K2", jnum(r.K2)},
                          {"residual", jnum(r.residual)}});
        }
        rep["cocycle_norms"] = cn;
    }
    w.json_file("solve_report.json", rep);
    std::ostringstream msg;
    msg << "solved " << solved.size() << " (sector, eps) points, max residual " << worst;
    res.messages.push_back(msg.str());
    return res;
}

RunResult cmd_flatness(const ExperimentConfig &cfg, const RunOptions &opt) {
    const ProblemSpec &spec = need_problem(cfg);
    const CoveringConfig &cov = need_covering(cfg);
    need_eps(cfg);
    if (cfg.grids.eps_moduli.size() < 8)
        throw invalid_grid("flatness needs at least 8 epsilon values");
    validate_config(cfg);
    RunResult res;
    Writer w(cfg, opt, res);
    const std::size_t nu = cov.covering.size();

    std::ostringstream csv;
    csv << "overlap,eps_modulus,diff_modulus,verdict\n";
    json overlaps = json::array();
    std::vector<PlotSeries> plots;
    for (std::size_t i = 0; i < nu; ++i) {
        const std::size_t jn = (i + 1) % nu;
        const SolutionEvaluator ev_i = cfg.evaluator(i), ev_j = cfg.evaluator(jn);
        const auto grid = cfg.overlap_eps(i);
        const Adjacency verdict = cfg.verdict(i);
        auto samples = parallel_map(grid.size(), opt.jobs, [&](std::size_t q) {
            const cplx eps = grid[q];
            const cplx t = cfg.t_for(std::arg(eps));
            const cplx a = eval_solution(ev_i, t, cfg.grids.z, eps, EvalMode::ray_numeric).value;
            const cplx b = eval_solution(ev_j, t, cfg.grids.z, eps, EvalMode::ray_numeric).value;
            return DiffSample{eps, a, b, std::abs(b - a)};
        });

        CocycleSample cs{static_cast<int>(i), {}, "sector " + std::to_string(jn) + " minus sector " + std::to_string(i)};
        for (const auto &s : samples) {
            cs.samples.emplace_back(s.epsilon, s.x_ip1 - s.x_i);
            csv << i << ',' << num(std::abs(s.epsilon)) << ',' << num(s.diff_modulus) << ',' << to_string(verdict)
                << '\n';
        }
        const FlatnessReport fit = fit_flatness(cs, cfg.seq.get());
        json o{{"overlap", i}, {"verdict", to_string(verdict)}, {"fit", flatness_json(fit)}};

        if (cfg.kernel && verdict.singular_between) {
            // Closed form: the difference is the residue sum of the poles swept
            // between the two rays.
            const double g1 = cov.gammas[i], g2 = cov.gammas[jn];
            const bool ccw = wrap_2pi(g2 - g1) <= pi;
            double worst = 0.0, worst_window = 0.0;
            json rows = json::array();
            for (const auto &s : samples) {
                const cplx T = cfg.t_for(std::arg(s.epsilon)) * cpow(s.epsilon, spec.r());
                const cplx expect = ccw ? crossed_residue_sum(*cfg.kernel, T, g1, g2)
                                        : -crossed_residue_sum(*cfg.kernel, T, g2, g1);
                const double rel = std::abs((s.x_ip1 - s.x_i) - expect) / std::abs(expect);
                worst = std::max(worst, rel);
                if (std::abs(T) >= 0.05 && std::abs(T) <= 0.2)
                    worst_window = std::max(worst_window, rel);
                rows.push_back({{"T_modulus", jnum(std::abs(T))}, {"relative_error", jnum(rel)}});
            }
            o["residue_check"] = {{"max_relative_error", jnum(worst)},
                                  {"max_relative_error_T_005_02", jnum(worst_window)},
                                  {"samples", rows}};
        }
        overlaps.push_back(o);

        PlotSeries pts{"overlap " + std::to_string(i) + " |diff|", {}, false, palette(i)};
        for (const auto &s : samples)
            pts.points.emplace_back(std::abs(s.epsilon), s.diff_modulus);
        plots.push_back(pts);
        PlotSeries env{"overlap " + std::to_string(i) + " " + std::string(model_name(fit.model)),
                       envelope_curve(fit, cfg.seq.get()), true, palette(i)};
        plots.push_back(env);
        res.messages.push_back("overlap " + std::to_string(i) + ": " + to_string(verdict) + ", model " +
                               std::string(model_name(fit.model)));
    }
    w.csv("flatness.csv", csv.str());
    w.json_file("flatness_report.json", {{"overlaps", overlaps}});
    if (cfg.run.svg)
        w.text("flatness.svg", loglog_svg("adjacent differences", "|eps|", "|X_{i+1} - X_i|", plots));
    return res;
}

std::vector<ComplexFunction> rs_sector_functions(const ExperimentConfig &cfg) {
    const CoveringConfig &cov = need_covering(cfg);
    const std::size_t nu = cov.covering.size();
    std::vector<ComplexFunction> G;
    if (cfg.run.rs_mode == "synthetic") {
        std::vector<ComplexFunction> f(nu);
        for (std::size_t h = 0; h < nu; ++h)
            if (!cfg.cocycles[h].is_zero())
                f[h] = [e = cfg.cocycles[h]](cplx xi) { return e(xi); };
        auto planted = std::make_shared<const CauchyHeine>(cov.covering, f, cfg.run.r_tilde, cfg.run.tol);
        for (std::size_t i = 0; i < nu; ++i)
            G.push_back([planted, a = cfg.convergent_part, i](cplx eps) { return a(eps) + planted->psi(i, eps); });
        return G;
    }
    need_problem(cfg);
    for (std::size_t i = 0; i < nu; ++i)
        G.push_back([ev = cfg.evaluator(i), t = cfg.grids.t, z = cfg.grids.z](cplx eps) {
            return eval_solution(ev, t, z, eps, EvalMode::termwise_exact).value;
        });
    return G;
}

RunResult cmd_rs(const ExperimentConfig &cfg, const RunOptions &opt) {
    const CoveringConfig &cov = need_covering(cfg);
    need_eps(cfg);
    validate_config(cfg);
    RunResult res;
    Writer w(cfg, opt, res);
    const std::size_t nu = cov.covering.size();
    std::vector<Adjacency> verdicts;
    std::vector<std::vector<cplx>> grids;
    for (std::size_t i = 0; i < nu; ++i) {
        verdicts.push_back(cfg.verdict(i));
        std::vector<cplx> g;
        for (cplx e : cfg.overlap_eps(i))
            if (std::abs(e) < cfg.run.r_tilde && std::abs(e) > cfg.run.inner_cutoff)
                g.push_back(e);
        if (g.empty())
            throw invalid_grid("overlap " + std::to_string(i) + " has no epsilon value inside (inner_cutoff, r_tilde)");
        grids.push_back(std::move(g));
    }
    RSOptions o;
    o.r_tilde = cfg.run.r_tilde;
    o.tol = cfg.run.tol;
    o.p_max = cfg.grids.p_max;
    o.inner_cutoff = cfg.run.inner_cutoff;
    o.multisummable = cfg.run.multisummable;
    std::vector<ComplexFunction> known;
    if (cfg.run.rs_mode == "synthetic")
        for (const auto &e : cfg.cocycles)
            known.push_back(e.is_zero() ? ComplexFunction{} : ComplexFunction([e](cplx xi) { return e(xi); }));
    const RSDecomposition rs = rs_decompose(rs_sector_functions(cfg), cov.covering, verdicts, grids, o, known);

    auto coeff_list = [](const std::vector<cplx> &c) {
        json a = json::array();
        for (cplx v : c)
            a.push_back(jcplx(v));
        return a;
    };
    json j;
    j["mode"] = cfg.run.rs_mode;
    j["level1"] = coeff_list(rs.coeffs1);
    j["level2"] = coeff_list(rs.coeffs2);
    j["convergent"] = coeff_list(rs.a_coeffs);
    j["verdicts"] = json::array();
    for (const auto &v : rs.verdicts)
        j["verdicts"].push_back(to_string(v));
    j["consistency"] = jnum(rs.consistency);
    j["jump_residual"] = jnum(rs.jump_residual);
    j["r_tilde"] = o.r_tilde;
    if (!rs.tag.empty())
        j["tag"] = rs.tag;
    if (cfg.run.rs_mode == "pde") {
        const cplx e0 = grids[0].front();
        const cplx x0 = rs.G[0](e0);
        const cplx c0 = rs.a_coeffs[0] + rs.coeffs1[0] + rs.coeffs2[0];
        j["level_agreement"] = {{"epsilon", jcplx(e0)}, {"value", jcplx(x0)}, {"eps0_sum", jcplx(c0)},
                                {"difference", jnum(std::abs(x0 - c0))}};
    }

    std::ostringstream csv;
    csv << "overlap,epsilon_re,epsilon_im,jump_level1,jump_level2,convergent_mismatch\n";
    std::vector<PlotSeries> plots;
    for (std::size_t i = 0; i < nu; ++i) {
        const std::size_t jn = (i + 1) % nu;
        PlotSeries p1{"|psi1_" + std::to_string(i) + "|", {}, false, palette(2 * i)};
        PlotSeries p2{"|psi2_" + std::to_string(i) + "|", {}, false, palette(2 * i + 1)};
        for (cplx e : grids[i]) {
            const cplx d1 = rs.psi1.psi(jn, e) - rs.psi1.psi(i, e) - rs.psi1.cocycle(i, e);
            const cplx d2 = rs.psi2.psi(jn, e) - rs.psi2.psi(i, e) - rs.psi2.cocycle(i, e);
            csv << i << ',' << num(e.real()) << ',' << num(e.imag()) << ',' << num(std::abs(d1)) << ','
                << num(std::abs(d2)) << ',' << num(std::abs(rs.a(jn, e) - rs.a(i, e))) << '\n';
            p1.points.emplace_back(std::abs(e), std::abs(rs.psi1.psi(i, e)));
            p2.points.emplace_back(std::abs(e), std::abs(rs.psi2.psi(i, e)));
        }
        plots.push_back(p1);
        plots.push_back(p2);
    }
    w.json_file("rs_coeffs.json", j);
    w.csv("rs_check.csv", csv.str());
    if (cfg.run.svg)
        w.text("psi.svg", loglog_svg("Cauchy-Heine pieces on overlap grids", "|eps|", "|psi|", plots));
    std::ostringstream msg;
    msg << "rs (" << cfg.run.rs_mode << "): jump residual " << rs.jump_residual << ", consistency " << rs.consistency;
    res.messages.push_back(msg.str());
    return res;
}

RunResult cmd_singular_directions(const ExperimentConfig &cfg, const RunOptions &opt) {
    const ProblemSpec &spec = need_problem(cfg);
    validate_config(cfg);
    RunResult res;
    Writer w(cfg, opt, res);
    const SingularSet sing = cfg.kernel ? cfg.kernel->singular_set() : singular_directions(spec.k, spec.s1, spec.a);
    json j;
    j["k"] = sing.k;
    j["s1"] = sing.s1;
    j["a"] = jcplx(sing.a);
    j["directions"] = sing.directions;
    j["pole_modulus"] = jnum(sing.pole_modulus);
    j["poles"] = json::array();
    for (cplx p : sing.poles())
        j["poles"].push_back(jcplx(p));
    if (cfg.covering) {
        const CoveringConfig &cov = *cfg.covering;
        const CoveringCheck cc = verify_covering(cov.covering);
        j["covering"] = {{"overlaps_nonempty", cc.overlaps_nonempty}, {"covers", cc.covers}, {"problems", cc.problems}};
        j["sectors"] = json::array();
        for (std::size_t i = 0; i < cov.covering.size(); ++i) {
            const Sector &s = cov.covering[i];
            const AssumptionACheck a = check_assumption_a(s, cov.rho0, sing);
            j["sectors"].push_back({{"index", i},
                                    {"direction", s.direction},
                                    {"opening", s.opening},
                                    {"gamma", cov.gammas[i]},
                                    {"assumption_a", {{"ok", a.ok}, {"margin", jnum(a.margin)}}}});
        }
        j["overlaps"] = json::array();
        for (std::size_t i = 0; i < cov.covering.size(); ++i) {
            const Adjacency computed =
                classify_rays(cov.gammas[i], cov.gammas[(i + 1) % cov.covering.size()], sing);
            j["overlaps"].push_back({{"overlap", i},
                                     {"mid_direction", cov.covering.overlap_mid(i)},
                                     {"classified", to_string(computed)},
                                     {"verdict", to_string(cfg.verdict(i))}});
        }
    }
    w.json_file("singular_directions.json", j);
    res.messages.push_back("singular directions: " + std::to_string(sing.directions.size()));
    return res;
}

RunResult cmd_demo(const ExperimentConfig &cfg, const RunOptions &opt) {
    RunResult all;
    auto take = [&](RunResult r) {
        all.files.insert(all.files.end(), r.files.begin(), r.files.end());
        all.messages.insert(all.messages.end(), r.messages.begin(), r.messages.end());
    };
    if (cfg.seq)
        take(cmd_check_sequence(cfg, opt));
    if (cfg.problem)
        take(cmd_singular_directions(cfg, opt));
    if (cfg.problem && !cfg.kernel && !cfg.grids.eps_moduli.empty())
        take(cmd_solve(cfg, opt));
    if (cfg.problem && cfg.covering && cfg.grids.eps_moduli.size() >= 8)
        take(cmd_flatness(cfg, opt));
    const bool has_cocycle = std::any_of(cfg.cocycles.begin(), cfg.cocycles.end(),
                                         [](const EpsExpr &e) { return !e.is_zero(); });
    if (cfg.covering && (has_cocycle || cfg.run.rs_mode == "pde"))
        take(cmd_rs(cfg, opt));
    return all;
}

} // namespace msl
