#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/asymptotics.hpp"
#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/field.hpp"
#include "plap/fixed_point.hpp"

namespace plap {

/// Machine-facing numbers are printed with 17 significant digits (lossless
/// double round-trip); human-facing reports use 10.
inline std::string fmt(double v, int digits = 17) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

inline void field_to_csv(const Field& f, std::ostream& os) {
    const Domain& d = *f.domain;
    if (!d.is_2d()) {
        os << "x,value\n";
        for (std::size_t i = 0; i < f.size(); ++i)
            os << fmt(d.node(i)) << ',' << fmt(f[i]) << '\n';
    } else {
        os << "x,y,value\n";
        for (std::size_t j = 0; j < d.ny(); ++j)
            for (std::size_t i = 0; i < d.nx(); ++i)
                os << fmt(d.node_x(i)) << ',' << fmt(d.node_y(j)) << ','
                   << fmt(f[d.flat_index(i, j)]) << '\n';
    }
}

inline void sweep_to_csv(const Sweep& s, std::ostream& os) {
    os << "p,torsion_sup,torsion_err_vs_d,lambda_p,eig_limit_check,kp_lower,kp_upper,"
          "level_lo,level_hi,m_cap_lo,m_cap_hi,ratio_lo,ratio_hi,m_used,u_err,verdict\n";
    for (const auto& r : s.rows) {
        os << fmt(r.p) << ',' << fmt(r.torsion_sup) << ',' << fmt(r.torsion_err_vs_d) << ','
           << fmt(r.lambda_p) << ',' << fmt(r.eig_limit_check) << ',' << fmt(r.kp_lower) << ','
           << fmt(r.kp_upper) << ',' << fmt(r.level_lo) << ',' << fmt(r.level_hi) << ','
           << fmt(r.m_cap_lo) << ',' << fmt(r.m_cap_hi) << ',' << fmt(r.ratio_lo) << ','
           << fmt(r.ratio_hi) << ',' << fmt(r.m_used) << ',' << fmt(r.u_err) << ','
           << r.verdict << '\n';
    }
}

inline nlohmann::json to_json(const SolveReport& r) {
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["outer_iterations"] = r.outer_iterations;
    j["sup_diffs"] = r.sup_diffs;
    j["bounds"] = {{"lower_ok", r.bounds_lower_ok},
                   {"upper_ok", r.bounds_upper_ok},
                   {"gradient_ok", r.bounds_grad_ok}};
    j["energy"] = {{"ok", r.energy_ok},
                   {"solution", r.energy_solution},
                   {"distance", r.energy_distance}};
    j["fixed_point_residual"] = r.fixed_point_residual;
    j["pde_residual"] = r.pde_residual;
    j["grad_sup_solution"] = r.grad_sup_solution;
    j["grad_cap"] = r.grad_cap;
    j["level"] = r.level;
    j["has_solution"] = r.solution.has_value();
    return j;
}

inline nlohmann::json to_json(const ProbeReport& r) {
    return {{"verdict", to_string(r.verdict)},
            {"iterations", r.iterations},
            {"last_sup", r.last_sup},
            {"growth_scale", r.growth_scale},
            {"sup_trace", r.sup_trace}};
}

inline nlohmann::json to_json(const LimitsReport& r) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"ok", c.ok},
                          {"value_lo", c.value_lo},
                          {"value_hi", c.value_hi},
                          {"target", c.target}});
    return {{"all_ok", r.all_ok}, {"checks", checks}};
}

inline nlohmann::json to_json(const DomainConstants& dc) {
    return {{"p", dc.p},
            {"b", dc.b},
            {"torsion_sup", dc.torsion_sup},
            {"torsion_grad_sup", dc.torsion_grad_sup},
            {"lambda_p", dc.lambda_p},
            {"d_sup", dc.d_sup},
            {"kp_lower", dc.kp_lower},
            {"kp_upper", dc.kp_upper},
            {"A_p", dc.A_p},
            {"B_p_lower", dc.B_p_lower},
            {"B_p_upper", dc.B_p_upper}};
}

/// Flat key=value text: one pair per line, '#' comments, blank lines
/// ignored. Keys use dotted section prefixes ("domain.shape", "solver.newton_tol").
inline std::map<std::string, std::string> parse_key_values(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
        val.erase(val.begin(), std::find_if(val.begin(), val.end(), notspace));
        if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::istringstream is(text);
    return parse_key_values(is);
}

/// Build a domain from key=value pairs under the given prefix:
/// shape, x_lo/x_hi (+ y_lo/y_hi for rectangles), R and N for balls,
/// resolution.
inline Domain domain_from_kv(const std::map<std::string, std::string>& kv,
                             const std::string& prefix = "domain.") {
    const auto get = [&](const std::string& name) -> const std::string& {
        const auto it = kv.find(prefix + name);
        if (it == kv.end()) throw config_error("missing config key: " + prefix + name);
        return it->second;
    };
    const auto get_or = [&](const std::string& name, const std::string& fallback) {
        const auto it = kv.find(prefix + name);
        return it == kv.end() ? fallback : it->second;
    };
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

    const std::string shape = get("shape");
    if (shape == "interval") {
        const auto res = std::size_t(num(get_or("resolution", "1025")));
        return Domain::interval(num(get("x_lo")), num(get("x_hi")), res);
    }
    if (shape == "ball") {
        const auto res = std::size_t(num(get_or("resolution", "1025")));
        return Domain::ball(num(get_or("center", "0")), num(get("R")), int(num(get("N"))), res);
    }
    if (shape == "rectangle") {
        const auto res = std::size_t(num(get_or("resolution", "129")));
        return Domain::rectangle(num(get("x_lo")), num(get("x_hi")), num(get("y_lo")),
                                 num(get("y_hi")), res);
    }
    throw config_error("config: unknown shape '" + shape + "'");
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open for writing: " + path);
    os << contents;
}

}  // namespace plap
