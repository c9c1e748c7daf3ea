#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/field.hpp"
#include "plap/p_poisson.hpp"
#include "plap/solver_config.hpp"

namespace plap {

/// Parameters of the forced problem
///   -div(|grad u|^{p-2} grad u)
///     = lambda u^{q-1} + beta u^{a-1} |grad u|^b + m u^{l-1} e^{alpha u^s}.
/// Convention: 0^0 = 1, so u^{a-1} is identically one when a = 1 even where
/// u vanishes (std::pow already follows this).
struct ProblemParams {
    double lambda = 0.0;
    double beta = 0.0;
    double m = 0.0;
    double p = 2.0;
    double q = 1.0;
    double a = 1.0;
    double b = 1.0;
    double l = 1.0;
    double alpha = 0.0;
    double s = 0.0;

    void validate() const {
        if (lambda < 0 || beta < 0 || m < 0)
            throw config_error("params: lambda, beta, m must be nonnegative");
        if (!(a >= 1)) throw config_error("params: a must be >= 1");
        if (!(l >= 1)) throw config_error("params: l must be >= 1");
        if (!(b > 0)) throw config_error("params: b must be positive");
        if (!(q >= 1)) throw config_error("params: q must be >= 1");
        if (!(p > q)) throw config_error("params: p must exceed q");
        if (alpha < 0 || s < 0) throw config_error("params: alpha, s must be nonnegative");
    }
};

/// Constants (c, gamma) of the regularity-theoretic gradient bound
/// ||grad w||_inf^{p-1} <= c p^gamma ||g||_inf. gamma = 5/2 is the convex
/// -domain value; c is not known in closed form and is calibrated per domain.
struct GradientEstimateConstants {
    double c = 1.0;
    double gamma = 2.5;

    void validate() const {
        if (!(c > 0)) throw config_error("gradient estimate: c must be positive");
        if (!(gamma >= 2.5)) throw config_error("gradient estimate: gamma must be >= 2.5");
    }
};

enum class KpEndpoint { lower, upper };

struct KpBounds {
    double lower;
    double upper;
};

/// Bracket for the (non-constructive) sharp gradient constant k_p: below by
/// the torsion profile, above by the calibrated regularity bound. The upper
/// bound needs p >= 2.
inline KpBounds kp_bounds(double torsion_sup, double torsion_grad_sup, double d_sup, double p,
                          const GradientEstimateConstants& ge) {
    ge.validate();
    if (!(p >= 2.0)) throw config_error("kp_bounds: upper bound requires p >= 2");
    KpBounds kb;
    kb.lower = std::max(torsion_sup / d_sup, torsion_grad_sup);
    kb.upper = std::pow(ge.c * std::pow(p, ge.gamma), 1.0 / (p - 1.0));
    if (kb.lower > kb.upper)
        throw config_error("kp_bounds: bounds crossed; the constant c is calibrated too small");
    return kb;
}

/// Per-(domain, p, b) scalar cache of everything the parameter calculus
/// consumes. B carries both endpoints of the k_p bracket; every dependent
/// quantity downstream is reported as an interval.
struct DomainConstants {
    double p = 0.0;
    double b = 0.0;
    double torsion_sup = 0.0;
    double torsion_grad_sup = 0.0;
    double lambda_p = 0.0;
    double d_sup = 0.0;
    double kp_lower = 0.0;
    double kp_upper = 0.0;
    double A_p = 0.0;
    double B_p_lower = 0.0;
    double B_p_upper = 0.0;

    double B(KpEndpoint e) const { return e == KpEndpoint::lower ? B_p_lower : B_p_upper; }
    double kp(KpEndpoint e) const { return e == KpEndpoint::lower ? kp_lower : kp_upper; }
};

inline DomainConstants make_domain_constants(double p, double b, double torsion_sup,
                                             double torsion_grad_sup, double lambda_p,
                                             double d_sup, const GradientEstimateConstants& ge) {
    if (!(b > 0)) throw config_error("domain constants: b must be positive");
    if (!(torsion_sup > 0)) throw config_error("domain constants: torsion max must be positive");
    DomainConstants dc;
    dc.p = p;
    dc.b = b;
    dc.torsion_sup = torsion_sup;
    dc.torsion_grad_sup = torsion_grad_sup;
    dc.lambda_p = lambda_p;
    dc.d_sup = d_sup;
    const auto kb = kp_bounds(torsion_sup, torsion_grad_sup, d_sup, p, ge);
    dc.kp_lower = kb.lower;
    dc.kp_upper = kb.upper;
    const double lphi = std::log(torsion_sup);
    dc.A_p = std::exp((p - 1.0) * lphi);
    dc.B_p_lower = std::exp(b * std::log(kb.lower) + (p - 1.0 - b) * lphi);
    dc.B_p_upper = std::exp(b * std::log(kb.upper) + (p - 1.0 - b) * lphi);
    return dc;
}

namespace detail {

// coef * A / t^expo, in log space; exact zero when the coefficient vanishes.
inline double power_term(double coef, double A, double expo, double t) {
    if (coef == 0.0) return 0.0;
    return std::exp(std::log(coef) + std::log(A) - expo * std::log(t));
}

// m * A * e^{alpha t^s} / t^expo, in log space; +inf once the exponent
// overflows (callers compare against finite thresholds).
inline double exp_term(double m, double A, double alpha, double s, double expo, double t) {
    if (m == 0.0) return 0.0;
    const double arg = std::log(m) + std::log(A) + alpha * std::pow(t, s) - expo * std::log(t);
    if (arg > 700.0) return std::numeric_limits<double>::infinity();
    return std::exp(arg);
}

/// Root of a strictly monotone function on an expanded bracket. Bracketing
/// starts from [1e-8, 1] and doubles the upper end until the sign changes,
/// capped at 1e8. The sign pattern at the final bracket certifies that the
/// root is the unique crossing.
inline double bisect_monotone(const std::function<double(double)>& f, bool increasing,
                              double rel_tol = 1e-12) {
    double lo = 1e-8, hi = 1.0;
    const double f_lo = f(lo);
    const double want_lo = increasing ? -1.0 : 1.0;
    if (!(f_lo * want_lo > 0))
        throw config_error("bisect: no sign change above 1e-8; parameters out of range");
    while (f(hi) * want_lo > 0) {
        hi *= 2.0;
        if (hi > 1e8) throw config_error("bisect: no sign change below 1e8");
    }
    for (int it = 0; it < 200 && (hi - lo) > rel_tol * std::max(lo, 1e-300); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) * want_lo > 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Left-hand side of the admissibility inequality at level M: the three
/// forcing contributions scaled by the supersolution margin. Admissible when
/// the sum is at most one.
inline double region_sum(const ProblemParams& pp, const DomainConstants& dc, double M,
                         KpEndpoint e) {
    pp.validate();
    if (pp.b != dc.b) throw config_error("region_sum: constants cached for a different b");
    if (!(M > 0)) throw config_error("region_sum: level M must be positive");
    return detail::power_term(pp.lambda, dc.A_p, pp.p - pp.q, M) +
           detail::power_term(pp.beta, dc.B(e), pp.p - (pp.a + pp.b), M) +
           detail::exp_term(pp.m, dc.A_p, pp.alpha, pp.s, pp.p - pp.l, M);
}

inline bool in_region(const ProblemParams& pp, const DomainConstants& dc, double M,
                      KpEndpoint e) {
    return region_sum(pp, dc, M, e) <= 1.0;
}

/// Level at which the two power terms (sublinear + convection) alone sum to
/// one half. Defined for p > max(q, a+b); the defining function decreases
/// strictly from +inf to 0, so the root is unique. Exact single-term
/// inversions are used when one coefficient vanishes.
inline double balance_level(const ProblemParams& pp, const DomainConstants& dc, KpEndpoint e) {
    pp.validate();
    if (pp.b != dc.b) throw config_error("balance_level: constants cached for a different b");
    if (!(pp.p > std::max(pp.q, pp.a + pp.b)))
        throw config_error("balance_level: requires p > max(q, a+b)");
    const double B = dc.B(e);
    if (pp.lambda == 0.0 && pp.beta == 0.0)
        throw config_error("balance_level: lambda and beta both zero");
    if (pp.beta == 0.0)
        return std::pow(2.0 * pp.lambda * dc.A_p, 1.0 / (pp.p - pp.q));
    if (pp.lambda == 0.0)
        return std::pow(2.0 * pp.beta * B, 1.0 / (pp.p - (pp.a + pp.b)));
    const auto f = [&](double t) {
        return detail::power_term(pp.lambda, dc.A_p, pp.p - pp.q, t) +
               detail::power_term(pp.beta, B, pp.p - (pp.a + pp.b), t) - 0.5;
    };
    return detail::bisect_monotone(f, /*increasing=*/false);
}

/// Largest admissible exponential coefficient at the given level:
/// m_cap = M^{p-l} / (2 A e^{alpha M^s}), evaluated in log space.
inline double exp_coeff_cap(const ProblemParams& pp, double level, double A) {
    if (!(A > 0)) throw config_error("exp_coeff_cap: A must be positive");
    if (!(level > 0)) throw config_error("exp_coeff_cap: level must be positive");
    return std::exp((pp.p - pp.l) * std::log(level) - std::log(2.0 * A) -
                    pp.alpha * std::pow(level, pp.s));
}

/// Level at which the exponential term alone reaches one half; requires the
/// exponential-dominant ordering l > p >= a+b and m > 0 (the defining
/// function increases strictly from 0 to +inf).
inline double exp_balance_level(const ProblemParams& pp, const DomainConstants& dc) {
    pp.validate();
    if (!(pp.l > pp.p) || !(pp.p >= pp.a + pp.b))
        throw config_error("exp_balance_level: requires l > p >= a+b");
    if (!(pp.m > 0)) throw config_error("exp_balance_level: requires m > 0");
    if (pp.alpha == 0.0)
        return std::pow(2.0 * pp.m * dc.A_p, 1.0 / (pp.p - pp.l));
    const auto f = [&](double t) {
        return detail::exp_term(pp.m, dc.A_p, pp.alpha, pp.s, pp.p - pp.l, t) - 0.5;
    };
    return detail::bisect_monotone(f, /*increasing=*/true);
}

/// Whether the two power terms stay within the remaining one-half margin at
/// the given level.
inline bool power_terms_within_half(const ProblemParams& pp, const DomainConstants& dc,
                                    double level, KpEndpoint e) {
    return detail::power_term(pp.lambda, dc.A_p, pp.p - pp.q, level) +
               detail::power_term(pp.beta, dc.B(e), pp.p - (pp.a + pp.b), level) <=
           0.5;
}

/// Level at which convection + exponential terms sum to one half, for the
/// fast-growth ordering q < p < min(a+b, l); both terms increase in t.
inline double mixed_balance_level(const ProblemParams& pp, const DomainConstants& dc,
                                  KpEndpoint e) {
    pp.validate();
    if (!(pp.p < std::min(pp.a + pp.b, pp.l)))
        throw config_error("mixed_balance_level: requires p < min(a+b, l)");
    if (!(pp.beta > 0) || !(pp.m > 0))
        throw config_error("mixed_balance_level: requires beta > 0 and m > 0");
    const double B = dc.B(e);
    const auto f = [&](double t) {
        return detail::power_term(pp.beta, B, pp.p - (pp.a + pp.b), t) +
               detail::exp_term(pp.m, dc.A_p, pp.alpha, pp.s, pp.p - pp.l, t) - 0.5;
    };
    return detail::bisect_monotone(f, /*increasing=*/true);
}

/// Largest admissible sublinear coefficient at the given level.
inline double sublinear_coeff_cap(double level, double A, double p, double q) {
    if (!(A > 0)) throw config_error("sublinear_coeff_cap: A must be positive");
    return std::exp((p - q) * std::log(level) - std::log(2.0 * A));
}

/// Closed-form level for the borderline ordering q < l = p < a+b, where the
/// convection term alone is balanced to one half.
inline double convection_balance_level(double beta, double B, double a, double b, double p) {
    if (!(beta > 0) || !(B > 0))
        throw config_error("convection_balance_level: requires beta, B > 0");
    if (!(p < a + b)) throw config_error("convection_balance_level: requires p < a+b");
    return std::pow(1.0 / (2.0 * beta * B), 1.0 / ((a + b) - p));
}

/// Region test for the same borderline ordering: sublinear + exponential
/// terms within the remaining half (the exponential term has no power of M
/// left when l = p).
inline bool sublinear_exp_within_half(const ProblemParams& pp, const DomainConstants& dc,
                                      double level) {
    return detail::power_term(pp.lambda, dc.A_p, pp.p - pp.q, level) +
               detail::exp_term(pp.m, dc.A_p, pp.alpha, pp.s, 0.0, level) <=
           0.5;
}

/// Limiting admissible exponential coefficient as p grows, in terms of the
/// distance max alone.
inline double exp_coeff_limit(double d_sup, double lambda, double beta, double q, double a,
                              double l, double alpha, double s) {
    return (lambda * std::pow(d_sup, q - 1.0) + beta * std::pow(d_sup, a - 1.0)) *
           std::pow(d_sup, l - 1.0) * std::exp(-alpha * std::pow(d_sup, s));
}

/// Necessary upper bound on m for solvability in the slow-growth range
/// 1 <= l < p with alpha, s > 0. Any solved instance must sit strictly
/// below it.
inline double nonexistence_bound(double lambda_p, double p, double l, double alpha, double s) {
    if (!(l >= 1) || !(l < p)) throw config_error("nonexistence_bound: requires 1 <= l < p");
    if (!(alpha > 0) || !(s > 0)) throw config_error("nonexistence_bound: requires alpha, s > 0");
    return lambda_p * std::pow((p - l) / (alpha * s * std::numbers::e), (p - l) / s);
}

/// Minimizer of Q(t) = m e^{alpha t^s} / t^{p-l}, the height at which the
/// exponential forcing is weakest relative to t^{p-1}.
inline double nonexistence_argmin(double p, double l, double alpha, double s) {
    if (!(l >= 1) || !(l < p)) throw config_error("nonexistence_argmin: requires 1 <= l < p");
    if (!(alpha > 0) || !(s > 0)) throw config_error("nonexistence_argmin: requires alpha, s > 0");
    return std::pow((p - l) / (alpha * s), 1.0 / s);
}

struct LimitPredictions {
    double level_limit;  // limit of the balanced level: the distance max
    double ratio_limit;  // limit of (torsion_sup / level)^p
};

inline LimitPredictions limit_predictions(double lambda, double beta, double q, double a,
                                          double d_sup) {
    const double denom = lambda * std::pow(d_sup, q - 1.0) + beta * std::pow(d_sup, a - 1.0);
    if (!(denom > 0)) throw config_error("limit_predictions: lambda and beta both vanish");
    return {d_sup, 1.0 / (2.0 * denom)};
}

/// Smallest c making the regularity upper bound dominate the torsion-based
/// lower bound at every listed (p, kp_lower) pair. A hair of headroom keeps
/// the bracket from crossing through roundoff at the binding p.
inline double calibrate_c(const std::vector<std::pair<double, double>>& p_and_kp_lower,
                          double gamma) {
    if (p_and_kp_lower.empty()) throw config_error("calibrate_c: empty grid");
    double c = 0.0;
    for (const auto& [p, kp_lower] : p_and_kp_lower) {
        if (!(p >= 2)) throw config_error("calibrate_c: grid values must satisfy p >= 2");
        c = std::max(c, std::exp((p - 1.0) * std::log(kp_lower) - gamma * std::log(p)));
    }
    return c * (1.0 + 1e-12);
}

/// Convenience overload: solves the torsion problem on each grid p.
inline double calibrate_c(const DomainPtr& dom, const std::vector<double>& p_grid, double gamma,
                          const SolverConfig& cfg) {
    const double d_sup = sup_norm(distance_function(dom));
    std::vector<std::pair<double, double>> pts;
    for (double p : p_grid) {
        const auto tor = torsion_function(dom, p, cfg);
        const double lower = std::max(sup_norm(tor.field) / d_sup, grad_sup(tor.field));
        pts.emplace_back(p, lower);
    }
    return calibrate_c(pts, gamma);
}

}  // namespace plap
