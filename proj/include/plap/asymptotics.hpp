#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/field.hpp"
#include "plap/fixed_point.hpp"
#include "plap/thresholds.hpp"

namespace plap {

/// One p of the large-p sweep. Every k_p-dependent column is an interval
/// from the two bracket endpoints, sorted so lower <= upper.
struct SweepRow {
    double p = 0.0;
    double torsion_sup = 0.0;
    double torsion_err_vs_d = 0.0;  // ||torsion - distance||_inf
    double lambda_p = 0.0;
    double eig_limit_check = 0.0;  // lambda_p^{1/p} * ||distance||_inf
    double kp_lower = 0.0, kp_upper = 0.0;
    double level_lo = 0.0, level_hi = 0.0;  // balanced level interval
    double m_cap_lo = 0.0, m_cap_hi = 0.0;  // exponential coefficient cap interval
    double ratio_lo = 0.0, ratio_hi = 0.0;  // (torsion_sup / level)^p interval
    double m_used = 0.0;
    double u_err = 0.0;  // ||solution - distance||_inf
    std::string verdict;
};

struct SweepConfig {
    std::vector<double> p_grid = {4, 8, 16, 32, 64, 100};
    double m_fraction = 0.5;       // m = m_fraction * min(m_cap, m_limit)
    double gamma = 2.5;            // convex-domain gradient-estimate exponent
    std::optional<double> c;       // gradient-estimate constant; calibrated when absent
    FixedPointConfig fp{};

    void validate() const {
        if (p_grid.empty()) throw config_error("sweep: empty p grid");
        for (std::size_t i = 1; i < p_grid.size(); ++i)
            if (!(p_grid[i] > p_grid[i - 1]))
                throw config_error("sweep: p grid must be strictly increasing");
        if (!(m_fraction > 0) || !(m_fraction < 1))
            throw config_error("sweep: m_fraction must lie in (0, 1)");
        if (c && !(*c > 0)) throw config_error("sweep: c must be positive");
    }
};

struct Sweep {
    std::vector<SweepRow> rows;
    double c_used = 0.0;
    double gamma = 0.0;
    double m_limit = 0.0;  // limiting exponential coefficient cap
    double d_sup = 0.0;
};

/// Sweep p across the grid: per p, build the constants, balance the level,
/// cap m, solve the full problem with m = m_fraction * min(cap, limit), and
/// record everything. Per-row failures land in the row verdict; the sweep
/// continues. Rows are independent and processed in grid order, so output
/// is deterministic.
inline Sweep run_sweep(const DomainPtr& dom, const ProblemParams& base, const SweepConfig& cfg) {
    base.validate();
    cfg.validate();
    const double p_min = *std::min_element(cfg.p_grid.begin(), cfg.p_grid.end());
    if (!(p_min > std::max({base.q, base.a + base.b, base.l})))
        throw config_error("sweep: grid minimum must exceed max(q, a+b, l)");

    Sweep sweep;
    sweep.gamma = cfg.gamma;
    const Field dist = distance_function(dom);
    sweep.d_sup = sup_norm(dist);
    sweep.m_limit = exp_coeff_limit(sweep.d_sup, base.lambda, base.beta, base.q, base.a, base.l,
                                    base.alpha, base.s);

    // Torsion and eigen solves are shared between calibration and the rows.
    struct PerP {
        PoissonSolution torsion;
        EigenPair eigen;
        double kp_lower;
    };
    std::vector<PerP> solves;
    std::vector<std::pair<double, double>> kp_pts;
    for (double p : cfg.p_grid) {
        PerP s;
        s.torsion = torsion_function(dom, p, cfg.fp.solver);
        s.eigen = principal_eigenpair(dom, p, cfg.fp.solver);
        s.kp_lower = std::max(sup_norm(s.torsion.field) / sweep.d_sup, grad_sup(s.torsion.field));
        kp_pts.emplace_back(p, s.kp_lower);
        solves.push_back(std::move(s));
    }
    sweep.c_used = cfg.c ? *cfg.c : calibrate_c(kp_pts, cfg.gamma);
    const GradientEstimateConstants ge{sweep.c_used, cfg.gamma};

    for (std::size_t k = 0; k < cfg.p_grid.size(); ++k) {
        const double p = cfg.p_grid[k];
        SweepRow row;
        row.p = p;
        try {
            DomainData data;
            data.domain = dom;
            data.torsion = solves[k].torsion;
            data.eigen = solves[k].eigen;
            data.dist = dist;
            data.constants = make_domain_constants(
                p, base.b, sup_norm(data.torsion.field), grad_sup(data.torsion.field),
                data.eigen.lambda_p, sweep.d_sup, ge);

            row.torsion_sup = data.constants.torsion_sup;
            row.torsion_err_vs_d = sup_diff(data.torsion.field, dist);
            row.lambda_p = data.constants.lambda_p;
            row.eig_limit_check = std::pow(data.constants.lambda_p, 1.0 / p) * sweep.d_sup;
            row.kp_lower = data.constants.kp_lower;
            row.kp_upper = data.constants.kp_upper;

            ProblemParams pp = base;
            pp.p = p;
            const double lvl_at_lower = balance_level(pp, data.constants, KpEndpoint::lower);
            const double lvl_at_upper = balance_level(pp, data.constants, KpEndpoint::upper);
            row.level_lo = std::min(lvl_at_lower, lvl_at_upper);
            row.level_hi = std::max(lvl_at_lower, lvl_at_upper);

            const double cap_at_lower = exp_coeff_cap(pp, lvl_at_lower, data.constants.A_p);
            const double cap_at_upper = exp_coeff_cap(pp, lvl_at_upper, data.constants.A_p);
            row.m_cap_lo = std::min(cap_at_lower, cap_at_upper);
            row.m_cap_hi = std::max(cap_at_lower, cap_at_upper);

            const auto ratio = [&](double lvl) {
                return std::exp(p * (std::log(row.torsion_sup) - std::log(lvl)));
            };
            row.ratio_lo = std::min(ratio(lvl_at_lower), ratio(lvl_at_upper));
            row.ratio_hi = std::max(ratio(lvl_at_lower), ratio(lvl_at_upper));

            pp.m = cfg.m_fraction * std::min(row.m_cap_lo, sweep.m_limit);
            row.m_used = pp.m;

            // Solve at the conservative endpoint: admissibility there implies
            // admissibility with the true constant.
            const auto rep = solve_problem(pp, lvl_at_upper, data, cfg.fp);
            row.verdict = to_string(rep.verdict);
            if (rep.solution) {
                row.u_err = sup_diff(*rep.solution, dist);
                if (!rep.bounds_all_ok()) row.verdict += "(bounds)";
                if (!rep.energy_ok) row.verdict += "(energy)";
            } else {
                row.u_err = std::numeric_limits<double>::quiet_NaN();
            }
        } catch (const std::exception& e) {
            row.verdict = std::string("error: ") + e.what();
            row.u_err = std::numeric_limits<double>::quiet_NaN();
        }
        sweep.rows.push_back(std::move(row));
    }
    return sweep;
}

struct LimitTolerances {
    double level_tol = 0.1;       // |level - d_sup| at the largest p
    double ratio_tol = 0.1;       // inflation of the ratio interval
    double m_cap_rel_tol = 0.15;  // relative gap between m cap and its limit
    double kp_lo_min = 0.9, kp_hi_max = 1.3;
    double eig_lo = 0.9, eig_hi = 1.1;
    double u_err_frac = 0.1;  // x d_sup
};

struct LimitCheck {
    std::string name;
    bool ok = false;
    double value_lo = 0.0, value_hi = 0.0;
    double target = 0.0;
};

struct LimitsReport {
    std::vector<LimitCheck> checks;
    bool all_ok = true;

    void add(LimitCheck c) {
        all_ok = all_ok && c.ok;
        checks.push_back(std::move(c));
    }
};

/// Compare the final sweep row against the scalar limit predictions.
inline LimitsReport check_limits(const Sweep& sweep, const ProblemParams& base,
                                 const LimitTolerances& tol = {}) {
    if (sweep.rows.empty()) throw config_error("check_limits: empty sweep");
    const SweepRow& last = sweep.rows.back();
    const auto pred =
        limit_predictions(base.lambda, base.beta, base.q, base.a, sweep.d_sup);

    LimitsReport rep;
    rep.add({"level -> distance max",
             std::max(std::abs(last.level_lo - pred.level_limit),
                      std::abs(last.level_hi - pred.level_limit)) <= tol.level_tol,
             last.level_lo, last.level_hi, pred.level_limit});
    rep.add({"ratio interval covers limit",
             last.ratio_lo - tol.ratio_tol <= pred.ratio_limit &&
                 pred.ratio_limit <= last.ratio_hi + tol.ratio_tol,
             last.ratio_lo, last.ratio_hi, pred.ratio_limit});
    rep.add({"m cap -> limit",
             std::max(std::abs(last.m_cap_lo - sweep.m_limit),
                      std::abs(last.m_cap_hi - sweep.m_limit)) <=
                 tol.m_cap_rel_tol * sweep.m_limit,
             last.m_cap_lo, last.m_cap_hi, sweep.m_limit});
    rep.add({"kp bracket near 1",
             last.kp_lower >= tol.kp_lo_min && last.kp_upper <= tol.kp_hi_max, last.kp_lower,
             last.kp_upper, 1.0});
    rep.add({"eigenvalue growth rate",
             last.eig_limit_check >= tol.eig_lo && last.eig_limit_check <= tol.eig_hi,
             last.eig_limit_check, last.eig_limit_check, 1.0});
    rep.add({"solution -> distance",
             std::isfinite(last.u_err) && last.u_err <= tol.u_err_frac * sweep.d_sup, last.u_err,
             last.u_err, 0.0});
    return rep;
}

}  // namespace plap
