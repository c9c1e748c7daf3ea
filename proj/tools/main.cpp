// Command-line front end: torsion | eigen | solve | region | thresholds |
// nonexist | sweep | selftest. Every run writes a manifest (config echo +
// version + verdicts) into the output directory so results are reproducible
// from the manifest alone.
//
// Exit codes: 0 success, 1 config error, 2 solver non-convergence (reports
// still written), 3 internal invariant violation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plap/io.hpp"
#include "plap/plap.hpp"
#include "plap/run_config.hpp"

namespace {

using nlohmann::json;

struct RunContext {
    plap::RunConfig cfg;
    std::string command;
    json verdicts;
    std::vector<std::string> outputs;

    std::filesystem::path out_path(const std::string& name) const {
        return std::filesystem::path(cfg.out_dir) / name;
    }

    void write_text(const std::string& name, const std::string& contents) {
        std::filesystem::create_directories(cfg.out_dir);
        plap::write_file(out_path(name).string(), contents);
        outputs.push_back(name);
    }

    void write_json_file(const std::string& name, const json& j) {
        write_text(name, j.dump(2) + "\n");
    }

    void write_field_csv(const std::string& name, const plap::Field& f) {
        std::ostringstream os;
        plap::field_to_csv(f, os);
        write_text(name, os.str());
    }

    void finish() {
        json manifest;
        manifest["tool"] = "plap";
        manifest["version"] = plap::version;
        manifest["command"] = command;
        manifest["config"] = plap::run_config_to_json(cfg);
        manifest["verdicts"] = verdicts;
        manifest["outputs"] = outputs;
        write_text("manifest.json", manifest.dump(2) + "\n");
    }
};

std::string human(double v) { return plap::fmt(v, 10); }

// Gradient-estimate constants for the run: calibrate c over the sweep grid
// plus the run's own p unless the user pinned it.
plap::GradientEstimateConstants resolve_ge(const plap::RunConfig& cfg, const plap::DomainPtr& dom,
                                           bool include_run_p = true) {
    if (cfg.c > 0) return {cfg.c, cfg.gamma};
    std::set<double> grid(cfg.p_grid.begin(), cfg.p_grid.end());
    if (include_run_p) grid.insert(cfg.params.p);
    std::vector<double> ps;
    for (double p : grid)
        if (p >= 2.0) ps.push_back(p);
    if (ps.empty()) throw plap::config_error("cannot calibrate c: no grid entries with p >= 2");
    return {plap::calibrate_c(dom, ps, cfg.gamma, cfg.solver), cfg.gamma};
}

int cmd_torsion(RunContext& ctx) {
    const auto dom = ctx.cfg.make_domain();
    const auto sol = plap::torsion_function(dom, ctx.cfg.params.p, ctx.cfg.solver);
    const double sup = plap::sup_norm(sol.field);
    const double gsup = plap::grad_sup(sol.field);
    const double bound = plap::torsion_max_bound(ctx.cfg.params.p, dom->dim(), dom->volume(),
                                                 dom->unit_ball_vol());
    std::cout << "torsion: p=" << human(ctx.cfg.params.p) << " sup=" << human(sup)
              << " grad_sup=" << human(gsup) << " sup_bound=" << human(bound)
              << " iters=" << sol.iterations << " converged=" << sol.converged << "\n";
    if (ctx.cfg.write_csv) ctx.write_field_csv("torsion.field.csv", sol.field);
    if (ctx.cfg.write_json)
        ctx.write_json_file("torsion.report.json",
                            {{"p", ctx.cfg.params.p},
                             {"sup", sup},
                             {"grad_sup", gsup},
                             {"sup_bound", bound},
                             {"iterations", sol.iterations},
                             {"residual_sup", sol.residual_sup},
                             {"strong_residual", sol.strong_residual},
                             {"converged", sol.converged}});
    ctx.verdicts["converged"] = sol.converged;
    return sol.converged ? 0 : 2;
}

int cmd_eigen(RunContext& ctx) {
    const auto dom = ctx.cfg.make_domain();
    const auto tor = plap::torsion_function(dom, ctx.cfg.params.p, ctx.cfg.solver);
    const auto eig = plap::principal_eigenpair(dom, ctx.cfg.params.p, ctx.cfg.solver);
    const bool lbep =
        plap::check_eigen_torsion_bound(eig, plap::sup_norm(tor.field), ctx.cfg.params.p);
    std::cout << "eigen: p=" << human(ctx.cfg.params.p) << " lambda_p=" << human(eig.lambda_p)
              << " residual=" << human(eig.rayleigh_residual) << " iters=" << eig.iterations
              << " converged=" << eig.converged << " torsion_consistency=" << lbep << "\n";
    if (ctx.cfg.write_csv) ctx.write_field_csv("eigenfunction.field.csv", eig.e_p);
    if (ctx.cfg.write_json)
        ctx.write_json_file("eigen.report.json", {{"p", ctx.cfg.params.p},
                                                  {"lambda_p", eig.lambda_p},
                                                  {"rayleigh_residual", eig.rayleigh_residual},
                                                  {"iterations", eig.iterations},
                                                  {"converged", eig.converged},
                                                  {"torsion_consistency", lbep}});
    ctx.verdicts["converged"] = eig.converged;
    ctx.verdicts["torsion_consistency"] = lbep;
    if (!lbep) throw plap::internal_error("eigenpair fails the torsion consistency bound");
    return eig.converged ? 0 : 2;
}

int cmd_solve(RunContext& ctx) {
    const auto dom = ctx.cfg.make_domain();
    const auto ge = resolve_ge(ctx.cfg, dom);
    const auto data =
        plap::make_domain_data(dom, ctx.cfg.params.p, ctx.cfg.params.b, ge, ctx.cfg.solver);
    const double level = ctx.cfg.level > 0
                             ? ctx.cfg.level
                             : plap::balance_level(ctx.cfg.params, data.constants,
                                                   ctx.cfg.endpoint());
    const auto rep = plap::solve_problem(ctx.cfg.params, level, data, ctx.cfg.fixed_point());
    std::cout << "solve: verdict=" << plap::to_string(rep.verdict)
              << " outer_iterations=" << rep.outer_iterations << " level=" << human(level)
              << "\n";
    if (rep.solution) {
        std::cout << "  sup=" << human(plap::sup_norm(*rep.solution))
                  << " bounds_ok=" << rep.bounds_all_ok() << " energy_ok=" << rep.energy_ok
                  << " fixed_point_residual=" << human(rep.fixed_point_residual)
                  << " pde_residual=" << human(rep.pde_residual) << "\n";
        if (ctx.cfg.write_csv) ctx.write_field_csv("solution.field.csv", *rep.solution);
    }
    if (ctx.cfg.write_json) {
        json j = plap::to_json(rep);
        j["constants"] = plap::to_json(data.constants);
        j["c"] = ge.c;
        j["gamma"] = ge.gamma;
        ctx.write_json_file("solve.report.json", j);
    }
    ctx.verdicts["verdict"] = plap::to_string(rep.verdict);
    ctx.verdicts["bounds_ok"] = rep.bounds_all_ok();
    ctx.verdicts["energy_ok"] = rep.energy_ok;
    return rep.verdict == plap::Verdict::converged ? 0 : 2;
}

json existence_report(const plap::RunConfig& cfg, const plap::DomainData& data) {
    const auto& pp = cfg.params;
    const auto& dc = data.constants;
    json j;
    j["not_applicable"] = json::array();

    if (pp.p > std::max(pp.q, pp.a + pp.b) && (pp.lambda > 0 || pp.beta > 0)) {
        const double lvl_lo = plap::balance_level(pp, dc, plap::KpEndpoint::lower);
        const double lvl_hi = plap::balance_level(pp, dc, plap::KpEndpoint::upper);
        const double cap_lo = plap::exp_coeff_cap(pp, lvl_lo, dc.A_p);
        const double cap_hi = plap::exp_coeff_cap(pp, lvl_hi, dc.A_p);
        j["power_balance"] = {{"level", {std::min(lvl_lo, lvl_hi), std::max(lvl_lo, lvl_hi)}},
                              {"m_cap", {std::min(cap_lo, cap_hi), std::max(cap_lo, cap_hi)}},
                              {"m_admissible", pp.m <= std::min(cap_lo, cap_hi)}};
    } else {
        j["not_applicable"].push_back("power_balance (needs p > max(q, a+b), lambda+beta > 0)");
    }

    if (pp.l > pp.p && pp.p >= pp.a + pp.b && pp.m > 0) {
        const double lvl = plap::exp_balance_level(pp, dc);
        j["exp_balance"] = {
            {"level", lvl},
            {"lambda_beta_admissible",
             {plap::power_terms_within_half(pp, dc, lvl, plap::KpEndpoint::lower),
              plap::power_terms_within_half(pp, dc, lvl, plap::KpEndpoint::upper)}}};
    } else {
        j["not_applicable"].push_back("exp_balance (needs l > p >= a+b, m > 0)");
    }

    if (pp.p < std::min(pp.a + pp.b, pp.l) && pp.beta > 0 && pp.m > 0) {
        const double lvl_lo = plap::mixed_balance_level(pp, dc, plap::KpEndpoint::lower);
        const double lvl_hi = plap::mixed_balance_level(pp, dc, plap::KpEndpoint::upper);
        const double cap_lo = plap::sublinear_coeff_cap(lvl_lo, dc.A_p, pp.p, pp.q);
        const double cap_hi = plap::sublinear_coeff_cap(lvl_hi, dc.A_p, pp.p, pp.q);
        j["mixed_balance"] = {
            {"level", {std::min(lvl_lo, lvl_hi), std::max(lvl_lo, lvl_hi)}},
            {"lambda_cap", {std::min(cap_lo, cap_hi), std::max(cap_lo, cap_hi)}},
            {"lambda_admissible", pp.lambda <= std::min(cap_lo, cap_hi)}};
    } else {
        j["not_applicable"].push_back("mixed_balance (needs q < p < min(a+b, l), beta, m > 0)");
    }

    if (pp.l == pp.p && pp.p < pp.a + pp.b && pp.beta > 0) {
        const double lvl_lo =
            plap::convection_balance_level(pp.beta, dc.B_p_lower, pp.a, pp.b, pp.p);
        const double lvl_hi =
            plap::convection_balance_level(pp.beta, dc.B_p_upper, pp.a, pp.b, pp.p);
        j["convection_balance"] = {
            {"level", {std::min(lvl_lo, lvl_hi), std::max(lvl_lo, lvl_hi)}},
            {"lambda_m_admissible",
             {plap::sublinear_exp_within_half(pp, dc, lvl_lo),
              plap::sublinear_exp_within_half(pp, dc, lvl_hi)}}};
    } else {
        j["not_applicable"].push_back("convection_balance (needs q < l = p < a+b, beta > 0)");
    }
    return j;
}

int cmd_region(RunContext& ctx) {
    const auto dom = ctx.cfg.make_domain();
    const auto ge = resolve_ge(ctx.cfg, dom);
    const auto data =
        plap::make_domain_data(dom, ctx.cfg.params.p, ctx.cfg.params.b, ge, ctx.cfg.solver);
    json j = existence_report(ctx.cfg, data);
    if (ctx.cfg.level > 0) {
        j["region_at_level"] = {
            {"level", ctx.cfg.level},
            {"sum_lower_kp",
             plap::region_sum(ctx.cfg.params, data.constants, ctx.cfg.level,
                              plap::KpEndpoint::lower)},
            {"sum_upper_kp",
             plap::region_sum(ctx.cfg.params, data.constants, ctx.cfg.level,
                              plap::KpEndpoint::upper)},
            {"in_region_lower_kp",
             plap::in_region(ctx.cfg.params, data.constants, ctx.cfg.level,
                             plap::KpEndpoint::lower)},
            {"in_region_upper_kp",
             plap::in_region(ctx.cfg.params, data.constants, ctx.cfg.level,
                             plap::KpEndpoint::upper)}};
    }
    j["constants"] = plap::to_json(data.constants);
    std::cout << j.dump(2) << "\n";
    if (ctx.cfg.write_json) ctx.write_json_file("region.report.json", j);
    ctx.verdicts["reported"] = true;
    return 0;
}

int cmd_thresholds(RunContext& ctx) {
    const auto dom = ctx.cfg.make_domain();
    const auto ge = resolve_ge(ctx.cfg, dom);
    const auto data =
        plap::make_domain_data(dom, ctx.cfg.params.p, ctx.cfg.params.b, ge, ctx.cfg.solver);
    const auto& pp = ctx.cfg.params;
    const auto& dc = data.constants;

    json j;
    j["inputs"] = plap::run_config_to_json(ctx.cfg);
    j["constants"] = plap::to_json(dc);
    j["c"] = ge.c;
    j["m_limit"] =
        plap::exp_coeff_limit(dc.d_sup, pp.lambda, pp.beta, pp.q, pp.a, pp.l, pp.alpha, pp.s);
    j["existence_regions"] = existence_report(ctx.cfg, data);
    if (pp.l >= 1 && pp.l < pp.p && pp.alpha > 0 && pp.s > 0) {
        j["nonexistence"] = {
            {"bound", plap::nonexistence_bound(dc.lambda_p, pp.p, pp.l, pp.alpha, pp.s)},
            {"argmin", plap::nonexistence_argmin(pp.p, pp.l, pp.alpha, pp.s)}};
    }
    const auto pred = [&]() -> json {
        try {
            const auto lp = plap::limit_predictions(pp.lambda, pp.beta, pp.q, pp.a, dc.d_sup);
            return {{"level_limit", lp.level_limit}, {"ratio_limit", lp.ratio_limit}};
        } catch (const plap::config_error&) {
            return nullptr;
        }
    }();
    j["limit_predictions"] = pred;
    std::cout << "thresholds: m_limit=" << human(j["m_limit"].get<double>()) << "\n";
    if (ctx.cfg.write_json) ctx.write_json_file("thresholds.report.json", j);
    ctx.verdicts["reported"] = true;
    return 0;
}

int cmd_nonexist(RunContext& ctx) {
    const auto dom = ctx.cfg.make_domain();
    const auto rep = plap::nonexistence_probe(dom, ctx.cfg.params, ctx.cfg.fixed_point());
    std::cout << "nonexist: verdict=" << plap::to_string(rep.verdict)
              << " iterations=" << rep.iterations << " last_sup=" << human(rep.last_sup) << "\n";
    if (ctx.cfg.write_json) ctx.write_json_file("nonexist.report.json", plap::to_json(rep));
    ctx.verdicts["verdict"] = plap::to_string(rep.verdict);
    return 0;
}

int cmd_sweep(RunContext& ctx) {
    const auto dom = ctx.cfg.make_domain();
    plap::SweepConfig scfg;
    scfg.p_grid = ctx.cfg.p_grid;
    scfg.m_fraction = ctx.cfg.m_fraction;
    scfg.gamma = ctx.cfg.gamma;
    if (ctx.cfg.c > 0) scfg.c = ctx.cfg.c;
    scfg.fp = ctx.cfg.fixed_point();
    const auto sweep = plap::run_sweep(dom, ctx.cfg.params, scfg);
    const auto limits = plap::check_limits(sweep, ctx.cfg.params);

    std::ostringstream os;
    plap::sweep_to_csv(sweep, os);
    if (ctx.cfg.write_csv) ctx.write_text("run.sweep.csv", os.str());
    if (ctx.cfg.write_json) {
        json j = plap::to_json(limits);
        j["c_used"] = sweep.c_used;
        j["m_limit"] = sweep.m_limit;
        j["d_sup"] = sweep.d_sup;
        ctx.write_json_file("limits.report.json", j);
    }
    bool rows_ok = true;
    for (const auto& r : sweep.rows) {
        std::cout << "p=" << std::setw(6) << r.p << "  torsion_err=" << human(r.torsion_err_vs_d)
                  << "  u_err=" << human(r.u_err) << "  " << r.verdict << "\n";
        rows_ok = rows_ok && r.verdict == "converged";
    }
    for (const auto& ck : limits.checks)
        std::cout << (ck.ok ? "[ok]  " : "[FAIL] ") << ck.name << " [" << human(ck.value_lo)
                  << ", " << human(ck.value_hi) << "] target " << human(ck.target) << "\n";
    ctx.verdicts["rows_converged"] = rows_ok;
    ctx.verdicts["limits_ok"] = limits.all_ok;
    return rows_ok ? 0 : 2;
}

int selftest_check(const std::string& name, bool ok, int& failures) {
    std::cout << (ok ? "[ok]  " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
    return failures;
}

int cmd_selftest(RunContext& ctx) {
    // Compact oracle suite at a coarse resolution; the full test suite lives
    // in tests/.
    int failures = 0;
    plap::SolverConfig cfg = ctx.cfg.solver;
    const auto ball = plap::make_ball(0, 1, 2, 257);
    for (double p : {2.0, 3.0, 5.0}) {
        const auto t = plap::torsion_function(ball, p, cfg);
        const double err =
            std::abs(plap::sup_norm(t.field) - plap::torsion_exact_ball(2, 1.0, p, 0.0));
        selftest_check("radial torsion max, p=" + human(p),
                       t.converged && err < 5e-4, failures);
    }
    {
        const auto g = plap::torsion_function(ball, 5.0, cfg).field;
        plap::Field g4 = g;
        for (auto& x : g4.values) x *= 4.0;
        const auto s1 = plap::solve_p_poisson(ball, 5.0, g, cfg);
        const auto s4 = plap::solve_p_poisson(ball, 5.0, g4, cfg);
        double err = 0;
        const double c = std::pow(4.0, 0.25);
        for (std::size_t i = 0; i < s1.field.size(); ++i)
            err = std::max(err, std::abs(s4.field[i] - c * s1.field[i]));
        selftest_check("scaling homogeneity, p=5", err <= 1e-8 * plap::sup_norm(s1.field),
                       failures);
    }
    {
        plap::Field g1(ball, 0.0), g2(ball, 0.0);
        for (std::size_t i = 0; i < g1.size(); ++i) {
            const double r = ball->node(i);
            g2.values[i] = 0.5 + 0.5 * std::cos(3.0 * r);
            g1.values[i] = g2.values[i] * (0.3 + 0.2 * std::sin(5.0 * r));
        }
        const auto s1 = plap::solve_p_poisson(ball, 3.0, g1, cfg);
        const auto s2 = plap::solve_p_poisson(ball, 3.0, g2, cfg);
        bool ok = true;
        for (std::size_t i = 0; i < s1.field.size(); ++i)
            ok = ok && s1.field[i] <= s2.field[i] + 1e-8;
        selftest_check("comparison principle, p=3", ok, failures);
    }
    {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        const auto interval = plap::make_interval(0, 1, 257);
        const auto e = plap::principal_eigenpair(interval, 2.0, cfg);
        selftest_check("interval eigenvalue near pi^2",
                       std::abs(e.lambda_p - pi2) < 1e-3 * pi2, failures);
        const auto t = plap::torsion_function(interval, 2.0, cfg);
        selftest_check("eigen-torsion consistency",
                       plap::check_eigen_torsion_bound(e, plap::sup_norm(t.field), 2.0),
                       failures);
    }
    ctx.verdicts["failures"] = failures;
    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    plap::RunConfig cfg;
    // --config is honored before everything else so flags can override it.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream is(argv[i + 1]);
            if (!is) {
                std::cerr << "cannot open config file: " << argv[i + 1] << "\n";
                return 1;
            }
            try {
                cfg = plap::run_config_from_kv(plap::parse_key_values(is), cfg);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 1;
            }
        }
    }

    CLI::App app{"Numerical laboratory for degenerate Dirichlet problems with convection and "
                 "exponential forcing"};
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "key=value config file (flags override)");

    bool out_dir_given = false;
    app.add_option("--out-dir", cfg.out_dir, "output directory")
        ->each([&](const std::string&) { out_dir_given = true; });
    app.add_flag("!--no-csv", cfg.write_csv, "skip CSV outputs");
    app.add_flag("!--no-json", cfg.write_json, "skip JSON outputs");

    app.add_option("--shape", cfg.shape, "interval | ball | rectangle");
    app.add_option("--x-lo", cfg.x_lo);
    app.add_option("--x-hi", cfg.x_hi);
    app.add_option("--y-lo", cfg.y_lo);
    app.add_option("--y-hi", cfg.y_hi);
    app.add_option("--R", cfg.R, "ball radius");
    app.add_option("--N", cfg.N, "ball dimension");
    app.add_option("--center", cfg.center, "ball center");
    app.add_option("--resolution", cfg.resolution, "nodes per axis (0 = default)");

    app.add_option("--lambda", cfg.params.lambda);
    app.add_option("--beta", cfg.params.beta);
    app.add_option("--m", cfg.params.m);
    app.add_option("--p", cfg.params.p);
    app.add_option("--q", cfg.params.q);
    app.add_option("--a", cfg.params.a);
    app.add_option("--b", cfg.params.b);
    app.add_option("--l", cfg.params.l);
    app.add_option("--alpha", cfg.params.alpha);
    app.add_option("--s", cfg.params.s);

    app.add_option("--newton-tol", cfg.solver.newton_tol);
    app.add_option("--eps-reg", cfg.solver.eps_reg);
    app.add_option("--max-newton-iters", cfg.solver.max_newton_iters);
    app.add_option("--p-step", cfg.solver.p_continuation_step);

    app.add_option("--gamma", cfg.gamma, "gradient-estimate exponent");
    app.add_option("--c", cfg.c, "gradient-estimate constant (0 = calibrate)");
    app.add_option("--kp-endpoint", cfg.kp_endpoint, "lower | upper");
    app.add_option("--level", cfg.level, "supersolution level M (0 = balance)");

    std::string p_grid_str;
    app.add_option("--p-grid", p_grid_str, "comma-separated sweep grid");
    app.add_option("--m-fraction", cfg.m_fraction);

    const std::vector<std::string> names = {"torsion", "eigen",    "solve",  "region",
                                            "thresholds", "nonexist", "sweep", "selftest"};
    for (const auto& n : names) app.add_subcommand(n);
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (!p_grid_str.empty()) cfg.p_grid = plap::detail::parse_double_list(p_grid_str);
        if (!out_dir_given) {
            if (const char* env = std::getenv("PLAP_OUT_DIR")) cfg.out_dir = env;
        }
        const std::string command = app.get_subcommands().front()->get_name();
        // The sweep takes its p values from the grid, not from --p.
        if (command == "sweep" && !cfg.p_grid.empty())
            cfg.params.p = *std::max_element(cfg.p_grid.begin(), cfg.p_grid.end());
        cfg.validate();

        RunContext ctx;
        ctx.cfg = cfg;
        ctx.command = command;

        int rc = 0;
        if (ctx.command == "torsion") rc = cmd_torsion(ctx);
        else if (ctx.command == "eigen") rc = cmd_eigen(ctx);
        else if (ctx.command == "solve") rc = cmd_solve(ctx);
        else if (ctx.command == "region") rc = cmd_region(ctx);
        else if (ctx.command == "thresholds") rc = cmd_thresholds(ctx);
        else if (ctx.command == "nonexist") rc = cmd_nonexist(ctx);
        else if (ctx.command == "sweep") rc = cmd_sweep(ctx);
        else if (ctx.command == "selftest") rc = cmd_selftest(ctx);
        ctx.finish();
        return rc;
    } catch (const plap::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const plap::internal_error& e) {
        std::cerr << "internal invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
