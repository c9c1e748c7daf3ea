#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/fixed_point.hpp"
#include "plap/io.hpp"
#include "plap/solver_config.hpp"
#include "plap/thresholds.hpp"

namespace plap {

/// One flat bag of settings for the command-line front end, loadable from
/// key=value text with dotted section prefixes and round-trippable without
/// loss. Flags override file values; file values override defaults.
struct RunConfig {
    // domain.*
    std::string shape = "ball";
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    double R = 1.0, center = 0.0;
    int N = 2;
    std::size_t resolution = 0;  // 0: per-shape default (1025 per axis; 129 for rectangles)

    // problem.*
    ProblemParams params{};

    // solver.* and fixed_point.*
    SolverConfig solver{};
    double outer_tol_factor = 1e-8;
    double inner_tol_factor = 1e-10;
    double bounds_tol_factor = 1e-6;
    int max_outer = 500;
    int max_inner = 500;

    // thresholds.*
    double gamma = 2.5;
    double c = 0.0;            // 0: calibrate over the sweep grid (plus the run's p)
    std::string kp_endpoint = "upper";
    double level = 0.0;        // 0: balance automatically

    // sweep.*
    std::vector<double> p_grid = {4, 8, 16, 32, 64, 100};
    double m_fraction = 0.5;

    // output.*
    std::string out_dir = "out";
    bool write_csv = true;
    bool write_json = true;

    std::size_t effective_resolution() const {
        if (resolution != 0) return resolution;
        return shape == "rectangle" ? 129 : 1025;
    }

    DomainPtr make_domain() const {
        const std::size_t res = effective_resolution();
        if (shape == "interval") return make_interval(x_lo, x_hi, res);
        if (shape == "ball") return make_ball(center, R, N, res);
        if (shape == "rectangle") return make_rectangle(x_lo, x_hi, y_lo, y_hi, res);
        throw config_error("unknown shape '" + shape + "'");
    }

    FixedPointConfig fixed_point() const {
        FixedPointConfig f;
        f.solver = solver;
        f.outer_tol_factor = outer_tol_factor;
        f.inner_tol_factor = inner_tol_factor;
        f.bounds_tol_factor = bounds_tol_factor;
        f.max_outer = max_outer;
        f.max_inner = max_inner;
        return f;
    }

    KpEndpoint endpoint() const {
        if (kp_endpoint == "upper") return KpEndpoint::upper;
        if (kp_endpoint == "lower") return KpEndpoint::lower;
        throw config_error("kp_endpoint must be 'upper' or 'lower'");
    }

    void validate() const {
        params.validate();
        solver.validate();
        (void)endpoint();
        if (resolution != 0 && resolution < 3) throw config_error("resolution must be >= 3");
        if (!(gamma >= 2.5)) throw config_error("gamma must be >= 2.5");
        if (c < 0) throw config_error("c must be nonnegative (0 = auto)");
        if (level < 0) throw config_error("level must be nonnegative (0 = auto)");
        if (!(m_fraction > 0) || !(m_fraction < 1))
            throw config_error("m_fraction must lie in (0, 1)");
    }
};

namespace detail {

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw config_error("not a number in list: '" + tok + "'");
        }
    }
    if (out.empty()) throw config_error("empty number list");
    return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt(v[i]);
    }
    return s;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("not a boolean: '" + s + "'");
}

}  // namespace detail

inline RunConfig run_config_from_kv(const std::map<std::string, std::string>& kv,
                                    RunConfig base = {}) {
    RunConfig c = std::move(base);
    const auto num = [](const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw config_error("config: not a number: '" + s + "'");
        }
    };
    for (const auto& [key, val] : kv) {
        if (key == "domain.shape") c.shape = val;
        else if (key == "domain.x_lo") c.x_lo = num(val);
        else if (key == "domain.x_hi") c.x_hi = num(val);
        else if (key == "domain.y_lo") c.y_lo = num(val);
        else if (key == "domain.y_hi") c.y_hi = num(val);
        else if (key == "domain.R") c.R = num(val);
        else if (key == "domain.center") c.center = num(val);
        else if (key == "domain.N") c.N = int(num(val));
        else if (key == "domain.resolution") c.resolution = std::size_t(num(val));
        else if (key == "problem.lambda") c.params.lambda = num(val);
        else if (key == "problem.beta") c.params.beta = num(val);
        else if (key == "problem.m") c.params.m = num(val);
        else if (key == "problem.p") c.params.p = num(val);
        else if (key == "problem.q") c.params.q = num(val);
        else if (key == "problem.a") c.params.a = num(val);
        else if (key == "problem.b") c.params.b = num(val);
        else if (key == "problem.l") c.params.l = num(val);
        else if (key == "problem.alpha") c.params.alpha = num(val);
        else if (key == "problem.s") c.params.s = num(val);
        else if (key == "solver.eps_reg") c.solver.eps_reg = num(val);
        else if (key == "solver.eps_schedule") c.solver.eps_schedule = detail::parse_double_list(val);
        else if (key == "solver.newton_tol") c.solver.newton_tol = num(val);
        else if (key == "solver.strong_residual_cap") c.solver.strong_residual_cap = num(val);
        else if (key == "solver.max_newton_iters") c.solver.max_newton_iters = int(num(val));
        else if (key == "solver.p_continuation_step") c.solver.p_continuation_step = num(val);
        else if (key == "fixed_point.outer_tol_factor") c.outer_tol_factor = num(val);
        else if (key == "fixed_point.inner_tol_factor") c.inner_tol_factor = num(val);
        else if (key == "fixed_point.bounds_tol_factor") c.bounds_tol_factor = num(val);
        else if (key == "fixed_point.max_outer") c.max_outer = int(num(val));
        else if (key == "fixed_point.max_inner") c.max_inner = int(num(val));
        else if (key == "thresholds.gamma") c.gamma = num(val);
        else if (key == "thresholds.c") c.c = (val == "auto") ? 0.0 : num(val);
        else if (key == "thresholds.kp_endpoint") c.kp_endpoint = val;
        else if (key == "thresholds.level") c.level = (val == "auto") ? 0.0 : num(val);
        else if (key == "sweep.p_grid") c.p_grid = detail::parse_double_list(val);
        else if (key == "sweep.m_fraction") c.m_fraction = num(val);
        else if (key == "output.dir") c.out_dir = val;
        else if (key == "output.csv") c.write_csv = detail::parse_bool(val);
        else if (key == "output.json") c.write_json = detail::parse_bool(val);
        else throw config_error("unknown config key: " + key);
    }
    return c;
}

inline std::string run_config_to_text(const RunConfig& c) {
    std::ostringstream os;
    os << "domain.shape=" << c.shape << '\n';
    os << "domain.x_lo=" << fmt(c.x_lo) << '\n';
    os << "domain.x_hi=" << fmt(c.x_hi) << '\n';
    os << "domain.y_lo=" << fmt(c.y_lo) << '\n';
    os << "domain.y_hi=" << fmt(c.y_hi) << '\n';
    os << "domain.R=" << fmt(c.R) << '\n';
    os << "domain.center=" << fmt(c.center) << '\n';
    os << "domain.N=" << c.N << '\n';
    os << "domain.resolution=" << c.resolution << '\n';
    os << "problem.lambda=" << fmt(c.params.lambda) << '\n';
    os << "problem.beta=" << fmt(c.params.beta) << '\n';
    os << "problem.m=" << fmt(c.params.m) << '\n';
    os << "problem.p=" << fmt(c.params.p) << '\n';
    os << "problem.q=" << fmt(c.params.q) << '\n';
    os << "problem.a=" << fmt(c.params.a) << '\n';
    os << "problem.b=" << fmt(c.params.b) << '\n';
    os << "problem.l=" << fmt(c.params.l) << '\n';
    os << "problem.alpha=" << fmt(c.params.alpha) << '\n';
    os << "problem.s=" << fmt(c.params.s) << '\n';
    os << "solver.eps_reg=" << fmt(c.solver.eps_reg) << '\n';
    os << "solver.eps_schedule=" << detail::join_doubles(c.solver.eps_schedule) << '\n';
    os << "solver.newton_tol=" << fmt(c.solver.newton_tol) << '\n';
    os << "solver.strong_residual_cap=" << fmt(c.solver.strong_residual_cap) << '\n';
    os << "solver.max_newton_iters=" << c.solver.max_newton_iters << '\n';
    os << "solver.p_continuation_step=" << fmt(c.solver.p_continuation_step) << '\n';
    os << "fixed_point.outer_tol_factor=" << fmt(c.outer_tol_factor) << '\n';
    os << "fixed_point.inner_tol_factor=" << fmt(c.inner_tol_factor) << '\n';
    os << "fixed_point.bounds_tol_factor=" << fmt(c.bounds_tol_factor) << '\n';
    os << "fixed_point.max_outer=" << c.max_outer << '\n';
    os << "fixed_point.max_inner=" << c.max_inner << '\n';
    os << "thresholds.gamma=" << fmt(c.gamma) << '\n';
    os << "thresholds.c=" << (c.c == 0.0 ? std::string("auto") : fmt(c.c)) << '\n';
    os << "thresholds.kp_endpoint=" << c.kp_endpoint << '\n';
    os << "thresholds.level=" << (c.level == 0.0 ? std::string("auto") : fmt(c.level)) << '\n';
    os << "sweep.p_grid=" << detail::join_doubles(c.p_grid) << '\n';
    os << "sweep.m_fraction=" << fmt(c.m_fraction) << '\n';
    os << "output.dir=" << c.out_dir << '\n';
    os << "output.csv=" << (c.write_csv ? "true" : "false") << '\n';
    os << "output.json=" << (c.write_json ? "true" : "false") << '\n';
    return os.str();
}

inline nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json j;
    for (const auto& [k, v] : parse_key_values(run_config_to_text(c))) j[k] = v;
    return j;
}

}  // namespace plap
