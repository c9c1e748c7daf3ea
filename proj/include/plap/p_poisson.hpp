#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "plap/detail/newton1d.hpp"
#include "plap/detail/newton2d.hpp"
#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/field.hpp"
#include "plap/solver_config.hpp"

namespace plap {

struct PoissonSolution {
    Field field;
    // Stopping metric of the final Newton stage on the unit-scale problem:
    // the smaller of the strong residual and the last full-step increment.
    // converged implies residual_sup <= cfg.newton_tol.
    double residual_sup = 0.0;
    double strong_residual = 0.0;  // physical-scale strong-form residual
    int iterations = 0;
    double p = 0.0;
    bool converged = false;
};

/// Closed-form value at radius r of the degenerate torsion profile on the
/// N-ball of radius R.
inline double torsion_exact_ball(int dim, double radius, double p, double r) {
    if (dim < 1) throw config_error("torsion_exact_ball: dimension must be >= 1");
    if (!(radius > 0)) throw config_error("torsion_exact_ball: radius must be positive");
    if (!(p > 1)) throw config_error("torsion_exact_ball: p must exceed 1");
    if (r < 0 || r > radius) throw config_error("torsion_exact_ball: r outside [0, R]");
    const double expo = p / (p - 1.0);
    return (p - 1.0) / p * std::pow(double(dim), -1.0 / (p - 1.0)) *
           (std::pow(radius, expo) - std::pow(r, expo));
}

/// Symmetrization bound on the torsion max over any domain of the given
/// volume: the ball of equal volume attains it.
inline double torsion_max_bound(double p, int dim, double volume, double unit_ball_vol) {
    if (!(p > 1)) throw config_error("torsion_max_bound: p must exceed 1");
    return (p - 1.0) / p * std::pow(double(dim), -1.0 / (p - 1.0)) *
           std::pow(volume / unit_ball_vol, p / (double(dim) * (p - 1.0)));
}

namespace detail {

inline std::vector<double> continuation_sequence(double p_target, double step) {
    std::vector<double> seq{2.0};
    if (std::abs(p_target - 2.0) < 1e-12) return seq;
    const double dir = p_target > 2.0 ? 1.0 : -1.0;
    double cur = 2.0;
    while ((p_target - cur) * dir > step * (1.0 + 1e-12)) {
        cur += dir * step;
        seq.push_back(cur);
    }
    seq.push_back(p_target);
    return seq;
}

struct StagePlan {
    double p;
    double eps;
    double tol;
};

inline std::vector<StagePlan> plan_stages(double p_target, const SolverConfig& cfg) {
    std::vector<StagePlan> plan;
    const double loose = std::max(cfg.newton_tol, 1e-8);
    const double eps_mid = cfg.eps_schedule[std::min<std::size_t>(1, cfg.eps_schedule.size() - 1)];
    for (double pk : continuation_sequence(p_target, cfg.p_continuation_step)) {
        if (pk == p_target) {
            for (std::size_t s = 0; s < cfg.eps_schedule.size(); ++s) {
                const bool last = s + 1 == cfg.eps_schedule.size();
                plan.push_back({pk, cfg.eps_schedule[s], last ? cfg.newton_tol : loose});
            }
        } else {
            plan.push_back({pk, eps_mid, loose});
        }
    }
    return plan;
}

}  // namespace detail

/// Solve the degenerate Dirichlet problem with forcing g on the mesh of
/// `dom`, by damped Newton on the regularized convex energy, walking the
/// regularization down cfg.eps_schedule and (when starting cold) continuing
/// in p from p = 2. The forcing is rescaled to sup-norm one before solving
/// and the solution scaled back, so solutions of proportional forcings are
/// exactly proportional. Non-convergence is reported, never thrown: the best
/// iterate comes back with converged = false.
inline PoissonSolution solve_p_poisson(const DomainPtr& dom, double p, const Field& g,
                                       const SolverConfig& cfg,
                                       const Field* warm_start = nullptr) {
    cfg.validate();
    if (!(p > 1.0)) throw config_error("solve_p_poisson: p must exceed 1");
    if (g.domain->num_nodes() != dom->num_nodes())
        throw config_error("solve_p_poisson: forcing lives on a different mesh");
    if (!g.all_finite()) throw config_error("solve_p_poisson: forcing has non-finite values");

    PoissonSolution sol;
    sol.p = p;
    const double gsup = sup_norm(g);
    if (gsup == 0.0) {
        sol.field = Field(dom, 0.0, "solution");
        sol.converged = true;
        return sol;
    }
    const double scale = std::pow(gsup, 1.0 / (p - 1.0));

    const auto& mass = dom->node_masses();
    std::vector<double> load(dom->num_nodes());
    for (std::size_t i = 0; i < load.size(); ++i) load[i] = mass[i] * g[i] / gsup;

    std::vector<double> v(dom->num_nodes(), 0.0);
    const auto seed_from_warm = [&]() {
        if (!warm_start) return false;
        if (warm_start->values.size() != v.size())
            throw config_error("solve_p_poisson: warm start lives on a different mesh");
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = warm_start->values[i] / scale;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (dom->is_boundary_node(i)) v[i] = 0.0;
        return true;
    };

    bool converged = false;
    double metric = 0.0;
    double strong = 0.0;
    int iters = 0;

    const auto run_plan = [&](const std::vector<detail::StagePlan>& plan) {
        for (const auto& st : plan) {
            const detail::Flux flux(st.p, st.eps);
            if (!dom->is_2d()) {
                const auto mesh = detail::Mesh1D::from(*dom);
                detail::Problem1D prob(mesh, load, flux);
                const auto out =
                    detail::newton_1d(prob, v, st.tol, cfg.max_newton_iters,
                                      cfg.strong_residual_cap);
                iters += out.iterations;
                converged = out.converged;
                metric = std::min(out.strong_residual, out.increment_sup);
                strong = out.strong_residual;
            } else {
                detail::Problem2D prob(*dom, load, flux);
                const auto out =
                    detail::newton_2d(prob, v, st.tol, cfg.max_newton_iters,
                                      cfg.strong_residual_cap);
                iters += out.iterations;
                converged = out.converged;
                metric = std::min(out.strong_residual, out.increment_sup);
                strong = out.strong_residual;
            }
        }
    };

    if (seed_from_warm()) {
        std::vector<detail::StagePlan> warm_plan;
        for (std::size_t s = 0; s < cfg.eps_schedule.size(); ++s) {
            const bool last = s + 1 == cfg.eps_schedule.size();
            warm_plan.push_back(
                {p, cfg.eps_schedule[s], last ? cfg.newton_tol : std::max(cfg.newton_tol, 1e-8)});
        }
        run_plan(warm_plan);
    }
    if (!converged) {
        std::fill(v.begin(), v.end(), 0.0);
        run_plan(detail::plan_stages(p, cfg));
    }

    std::vector<double> scaled(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) scaled[i] = v[i] * scale;
    sol.field = Field(dom, std::move(scaled), "solution");
    sol.field.zero_boundary();
    sol.residual_sup = metric;
    sol.strong_residual = strong * gsup;
    sol.iterations = iters;
    sol.converged = converged;
    return sol;
}

/// Torsion profile: unit forcing.
inline PoissonSolution torsion_function(const DomainPtr& dom, double p, const SolverConfig& cfg) {
    Field one(dom, 1.0, "unit forcing");
    auto sol = solve_p_poisson(dom, p, one, cfg);
    sol.field.label = "torsion";
    return sol;
}

/// Strong-form residual sup-norm of the discrete operator applied to v
/// against the forcing g, at the regularization floor. Works on physical
/// scales (no normalization).
inline double pde_residual_sup(const DomainPtr& dom, double p, const Field& v, const Field& g,
                               double eps) {
    const auto& mass = dom->node_masses();
    std::vector<double> load(dom->num_nodes());
    for (std::size_t i = 0; i < load.size(); ++i) load[i] = mass[i] * g[i];
    const detail::Flux flux(p, eps);
    if (!dom->is_2d()) {
        const auto mesh = detail::Mesh1D::from(*dom);
        detail::Problem1D prob(mesh, load, flux);
        return prob.strong_residual_sup(v.values);
    }
    detail::Problem2D prob(*dom, load, flux);
    return prob.strong_residual_sup(v.values);
}

}  // namespace plap
