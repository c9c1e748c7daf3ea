#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/field.hpp"
#include "plap/p_poisson.hpp"
#include "plap/solver_config.hpp"
#include "plap/spectral.hpp"
#include "plap/thresholds.hpp"

namespace plap {

/// Everything a fixed-point run reuses across iterations: the torsion
/// profile, the principal eigenpair, and the scalar constants derived from
/// them. Build once per (domain, p, b).
struct DomainData {
    DomainPtr domain;
    PoissonSolution torsion;
    EigenPair eigen;
    Field dist;
    DomainConstants constants;
};

inline DomainData make_domain_data(const DomainPtr& dom, double p, double b,
                                   const GradientEstimateConstants& ge,
                                   const SolverConfig& cfg) {
    DomainData data;
    data.domain = dom;
    data.torsion = torsion_function(dom, p, cfg);
    data.eigen = principal_eigenpair(dom, p, cfg);
    // Everything downstream consumes these as exact constants; refusing a
    // half-converged cache beats propagating it silently.
    if (!data.torsion.converged)
        throw internal_error("make_domain_data: torsion solve did not converge");
    if (!data.eigen.converged)
        throw internal_error("make_domain_data: eigenpair iteration did not converge");
    data.dist = distance_function(dom);
    data.constants =
        make_domain_constants(p, b, sup_norm(data.torsion.field), grad_sup(data.torsion.field),
                              data.eigen.lambda_p, sup_norm(data.dist), ge);
    return data;
}

struct FixedPointConfig {
    SolverConfig solver{};
    double outer_tol_factor = 1e-8;   // x level: outer sup-diff stop
    double inner_tol_factor = 1e-10;  // x level: frozen-forcing inner stop
    double bounds_tol_factor = 1e-6;  // x level: box membership slack
    int max_outer = 500;
    int max_inner = 500;
};

/// The order box the iteration lives in: eigenfunction-scaled floor,
/// torsion-scaled ceiling, and the gradient cap implied by the chosen
/// k_p endpoint.
struct BoxF {
    Field sub;
    Field super;
    double grad_cap = 0.0;
    double level = 0.0;
};

inline BoxF build_box(const ProblemParams& pp, double level, const DomainData& data,
                      const FixedPointConfig& cfg, KpEndpoint cap_endpoint = KpEndpoint::upper) {
    pp.validate();
    if (!(level > 0)) throw config_error("build_box: level must be positive");
    if (!in_region(pp, data.constants, level, cap_endpoint))
        throw config_error("build_box: parameters outside the admissible region at this level");

    BoxF box;
    box.level = level;
    const double phi_sup = data.constants.torsion_sup;
    const double floor_scale =
        std::pow(pp.lambda / data.constants.lambda_p, 1.0 / (pp.p - pp.q));
    box.sub = Field(data.domain, 0.0, "box floor");
    box.super = Field(data.domain, 0.0, "box ceiling");
    for (std::size_t i = 0; i < box.sub.size(); ++i) {
        box.sub.values[i] = floor_scale * data.eigen.e_p[i];
        box.super.values[i] = level / phi_sup * data.torsion.field[i];
    }
    box.grad_cap = data.constants.kp(cap_endpoint) * level / phi_sup;

    const double tol = cfg.bounds_tol_factor * level;
    for (std::size_t i = 0; i < box.sub.size(); ++i)
        if (box.sub[i] > box.super[i] + tol)
            throw box_violation(box_violation::Kind::above_ceiling, i, box.sub[i], box.super[i],
                                "build_box: floor exceeds ceiling (region violated or mesh "
                                "too coarse)");
    return box;
}

namespace detail {

// m * u^{l-1} * e^{alpha u^s}, assembled in log space so intermediate
// exponentials cannot overflow when the product is representable. arg_cap
// bounds the log of the result.
inline double exp_forcing(double m, double l, double alpha, double s, double u,
                          double arg_cap = 709.0) {
    if (m == 0.0) return 0.0;
    if (u <= 0.0) return (l == 1.0) ? m : 0.0;  // 0^0 = 1
    const double arg = std::log(m) + (l - 1.0) * std::log(u) + alpha * std::pow(u, s);
    return std::exp(std::min(arg, arg_cap));
}

inline Field frozen_forcing(const ProblemParams& pp, const Field& u, double arg_cap = 709.0) {
    Field h(u.domain, 0.0, "frozen forcing");
    const auto gmag = node_gradient_magnitude(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = std::max(u[i], 0.0);
        double v = 0.0;
        if (pp.beta != 0.0)
            v += pp.beta * std::pow(ui, pp.a - 1.0) * std::pow(gmag[i], pp.b);
        v += exp_forcing(pp.m, pp.l, pp.alpha, pp.s, ui, arg_cap);
        h.values[i] = v;
    }
    return h;
}

inline Field reaction_plus(const ProblemParams& pp, const Field& u, const Field& h) {
    Field rhs(u.domain, 0.0, "semilinear forcing");
    for (std::size_t i = 0; i < u.size(); ++i)
        rhs.values[i] = pp.lambda * std::pow(std::max(u[i], 0.0), pp.q - 1.0) + h[i];
    return rhs;
}

}  // namespace detail

struct PicardStep {
    Field value;
    int inner_iterations = 0;
    double inner_diff = 0.0;
};

/// One application of the fixed-point map: freeze the convection and
/// exponential forcing at u, then solve the remaining sublinear problem by
/// the monotone inner iteration started at the box floor. Iterates rise
/// monotonically and stay under the ceiling whenever u respects the box;
/// violations are thrown, not patched.
inline PicardStep picard_step(const ProblemParams& pp, const Field& u, const BoxF& box,
                              const DomainData& data, const FixedPointConfig& cfg) {
    const double tol = cfg.bounds_tol_factor * box.level;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < box.sub[i] - tol)
            throw box_violation(box_violation::Kind::below_floor, i, u[i], box.sub[i],
                                "picard_step: input below box floor");
        if (u[i] > box.super[i] + tol)
            throw box_violation(box_violation::Kind::above_ceiling, i, u[i], box.super[i],
                                "picard_step: input above box ceiling");
    }
    {
        const double g = grad_sup(u);
        if (g > box.grad_cap * (1.0 + cfg.bounds_tol_factor))
            throw box_violation(box_violation::Kind::gradient_cap, u.size(), g, box.grad_cap,
                                "picard_step: input gradient exceeds cap");
    }

    const Field h = detail::frozen_forcing(pp, u);
    const double mono_tol = std::max(10.0 * cfg.solver.newton_tol, tol);

    PicardStep out;
    Field cur = box.sub;
    for (int k = 1; k <= cfg.max_inner; ++k) {
        const Field rhs = detail::reaction_plus(pp, cur, h);
        auto sol = solve_p_poisson(data.domain, pp.p, rhs, cfg.solver, &cur);
        Field next = std::move(sol.field);

        for (std::size_t i = 0; i < next.size(); ++i) {
            if (next[i] < cur[i] - mono_tol)
                throw internal_error("picard_step: inner iteration lost monotonicity");
            if (next[i] > box.super[i] + tol)
                throw box_violation(box_violation::Kind::above_ceiling, i, next[i], box.super[i],
                                    "picard_step: inner iterate above box ceiling");
        }

        out.inner_diff = sup_diff(next, cur);
        out.inner_iterations = k;
        cur = std::move(next);
        if (out.inner_diff <= cfg.inner_tol_factor * box.level) {
            out.value = std::move(cur);
            return out;
        }
    }
    throw internal_error("picard_step: inner iteration exhausted without settling");
}

enum class Verdict { converged, diverged_above_super, max_iters };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::converged: return "converged";
        case Verdict::diverged_above_super: return "diverged_above_super";
        case Verdict::max_iters: return "max_iters";
    }
    return "?";
}

struct SolveReport {
    std::optional<Field> solution;
    int outer_iterations = 0;
    std::vector<double> sup_diffs;
    bool bounds_lower_ok = false;
    bool bounds_upper_ok = false;
    bool bounds_grad_ok = false;
    bool energy_ok = false;
    double energy_solution = 0.0;
    double energy_distance = 0.0;
    double fixed_point_residual = 0.0;
    double pde_residual = 0.0;
    double grad_sup_solution = 0.0;
    double grad_cap = 0.0;
    double level = 0.0;
    Verdict verdict = Verdict::max_iters;

    bool bounds_all_ok() const { return bounds_lower_ok && bounds_upper_ok && bounds_grad_ok; }
};

/// Outer iteration of the fixed-point map from the box floor. Existence
/// theory guarantees a fixed point in the box, not that this iteration
/// reaches it, so non-convergence is a reported verdict rather than an
/// error. On convergence the report carries the box-bound checks, the
/// energy comparison against the distance function, and the strong residual
/// of the full equation.
inline SolveReport solve_problem(const ProblemParams& pp, double level, const DomainData& data,
                                 const FixedPointConfig& cfg) {
    pp.validate();
    const BoxF box = build_box(pp, level, data, cfg);
    const double outer_tol = cfg.outer_tol_factor * level;

    SolveReport rep;
    rep.level = level;
    rep.grad_cap = box.grad_cap;

    Field u = box.sub;
    for (int n = 1; n <= cfg.max_outer; ++n) {
        PicardStep step;
        try {
            step = picard_step(pp, u, box, data, cfg);
        } catch (const box_violation& bv) {
            if (bv.kind == box_violation::Kind::below_floor)
                throw internal_error(std::string("solve_problem: iterate fell below the box "
                                                 "floor: ") +
                                     bv.what());
            rep.verdict = Verdict::diverged_above_super;
            rep.outer_iterations = n;
            return rep;
        }
        const double d = sup_diff(step.value, u);
        rep.sup_diffs.push_back(d);
        rep.outer_iterations = n;
        u = std::move(step.value);
        if (d <= outer_tol) {
            rep.verdict = Verdict::converged;
            break;
        }
    }
    if (rep.verdict != Verdict::converged) return rep;

    rep.fixed_point_residual = sup_diff(picard_step(pp, u, box, data, cfg).value, u);

    const double tol = cfg.bounds_tol_factor * level;
    rep.bounds_lower_ok = rep.bounds_upper_ok = true;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < box.sub[i] - tol) rep.bounds_lower_ok = false;
        if (u[i] > box.super[i] + tol) rep.bounds_upper_ok = false;
    }
    rep.grad_sup_solution = grad_sup(u);
    rep.bounds_grad_ok = rep.grad_sup_solution <= box.grad_cap + tol;

    const Field h = detail::frozen_forcing(pp, u);
    const EnergySpec espec{pp.p, pp.q, pp.lambda, h};
    rep.energy_solution = energy(espec, u);
    rep.energy_distance = energy(espec, data.dist);
    rep.energy_ok =
        rep.energy_solution <= rep.energy_distance + 1e-10 * (1.0 + std::abs(rep.energy_distance));

    rep.pde_residual =
        pde_residual_sup(data.domain, pp.p, u, detail::reaction_plus(pp, u, h), cfg.solver.eps_reg);

    u.label = "solution";
    rep.solution = std::move(u);
    return rep;
}

enum class ProbeVerdict { stabilized, unbounded_growth };

inline std::string to_string(ProbeVerdict v) {
    return v == ProbeVerdict::stabilized ? "stabilized" : "unbounded-growth";
}

struct ProbeReport {
    ProbeVerdict verdict = ProbeVerdict::stabilized;
    int iterations = 0;
    double last_sup = 0.0;
    double growth_scale = 0.0;
    std::vector<double> sup_trace;
};

/// Numerical companion to the nonexistence bound: iterate the frozen-forcing
/// map without a ceiling, under caps that double whenever an iterate reaches
/// them. Fifty consecutive growing steps above ten times the reference scale
/// is reported as unbounded growth; settling anywhere is reported as
/// stabilized. Evidence, not proof, in both directions.
inline ProbeReport nonexistence_probe(const DomainPtr& dom, const ProblemParams& pp,
                                      const FixedPointConfig& cfg, int max_iterations = 600) {
    pp.validate();
    if (!(pp.l >= 1) || !(pp.l < pp.p))
        throw config_error("nonexistence_probe: requires 1 <= l < p");
    if (!(pp.alpha > 0) || !(pp.s > 0))
        throw config_error("nonexistence_probe: requires alpha, s > 0");
    if (pp.beta != 0.0) throw config_error("nonexistence_probe: requires beta = 0");

    const double t_m = nonexistence_argmin(pp.p, pp.l, pp.alpha, pp.s);
    const double d_sup = sup_norm(distance_function(dom));
    const double scale = std::max(t_m, d_sup);
    // Keep the forcing's log below a level whose solve stays comfortably
    // inside double range even after the 1/(p-1) rescaling.
    const double arg_cap = std::min(709.0, (pp.p - 1.0) * 460.0);

    ProbeReport rep;
    rep.growth_scale = scale;
    double cap = 20.0 * scale;
    Field u(dom, 0.0, "probe iterate");
    double prev_sup = 0.0;
    int streak = 0;

    for (int n = 1; n <= max_iterations; ++n) {
        Field rhs(dom, 0.0);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double ui = std::max(u[i], 0.0);
            rhs.values[i] = pp.lambda * std::pow(ui, pp.q - 1.0) +
                            detail::exp_forcing(pp.m, pp.l, pp.alpha, pp.s, ui, arg_cap);
        }
        auto sol = solve_p_poisson(dom, pp.p, rhs, cfg.solver, &u);
        Field next = std::move(sol.field);
        bool capped = false;
        for (auto& x : next.values)
            if (x > cap) {
                x = cap;
                capped = true;
            }
        const double sup = sup_norm(next);
        if (capped) cap *= 2.0;

        const bool growing = sup > prev_sup * (1.0 + 1e-12) + 1e-300;
        streak = (growing && sup > 10.0 * scale) ? streak + 1 : 0;

        rep.sup_trace.push_back(sup);
        rep.iterations = n;
        rep.last_sup = sup;
        if (streak >= 50) {
            rep.verdict = ProbeVerdict::unbounded_growth;
            return rep;
        }
        const double d = sup_diff(next, u);
        u = std::move(next);
        prev_sup = sup;
        if (!capped && d <= 1e-8 * std::max(scale, sup)) {
            rep.verdict = ProbeVerdict::stabilized;
            return rep;
        }
    }
    rep.verdict = ProbeVerdict::stabilized;
    return rep;
}

}  // namespace plap
