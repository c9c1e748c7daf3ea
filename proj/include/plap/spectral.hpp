#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/field.hpp"
#include "plap/p_poisson.hpp"
#include "plap/solver_config.hpp"

namespace plap {

/// Principal Dirichlet eigenpair, sup-normalized: lambda_p and the positive
/// eigenfunction with max value one.
struct EigenPair {
    double lambda_p = 0.0;
    Field e_p;
    double rayleigh_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Discrete Rayleigh quotient int |grad v|^p / int |v|^p, with the same
/// cell-gradient rule as the solver. Invariant under rescaling of v.
inline double rayleigh_quotient(const Field& v, double p) {
    const auto& mass = v.domain->node_masses();
    double den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) den += mass[i] * std::pow(std::abs(v[i]), p);
    if (den == 0.0) throw config_error("rayleigh_quotient: zero field");
    return grad_lp_pow(v, p) / den;
}

/// Inverse iteration in the positive cone: repeatedly solve with the scaled
/// power of the previous iterate as forcing, renormalize to sup-norm one,
/// and update the quotient. Seeded with the torsion profile, which is
/// positive with the right boundary behavior. Renormalizing every step keeps
/// the powers representable at large p.
inline EigenPair principal_eigenpair(const DomainPtr& dom, double p, const SolverConfig& cfg,
                                     double quotient_tol = 1e-8, double vector_tol = 1e-8,
                                     int max_iterations = 500) {
    if (!(p > 1.0)) throw config_error("principal_eigenpair: p must exceed 1");

    auto torsion = torsion_function(dom, p, cfg);
    Field v = torsion.field;
    {
        const double s = sup_norm(v);
        if (s == 0.0) throw internal_error("principal_eigenpair: torsion seed vanished");
        for (auto& x : v.values) x /= s;
    }
    double lambda = rayleigh_quotient(v, p);

    EigenPair out;
    for (int it = 1; it <= max_iterations; ++it) {
        Field rhs(dom, 0.0);
        for (std::size_t i = 0; i < rhs.size(); ++i)
            rhs.values[i] = lambda * std::pow(v[i], p - 1.0);
        auto step = solve_p_poisson(dom, p, rhs, cfg, &v);

        Field vn = step.field;
        const double s = sup_norm(vn);
        if (s == 0.0) throw internal_error("principal_eigenpair: iterate collapsed to zero");
        for (auto& x : vn.values) x /= s;
        for (std::size_t i = 0; i < vn.size(); ++i)
            if (!dom->is_boundary_node(i) && vn[i] <= 0.0)
                throw internal_error("principal_eigenpair: sign-changing iterate");

        const double lambda_new = rayleigh_quotient(vn, p);
        const double dv = sup_diff(vn, v);
        const bool done =
            std::abs(lambda_new - lambda) <= quotient_tol * lambda && dv <= vector_tol;
        v = std::move(vn);
        lambda = lambda_new;
        out.iterations = it;
        if (done) {
            out.converged = true;
            break;
        }
    }

    out.lambda_p = lambda;
    v.label = "eigenfunction";
    out.e_p = std::move(v);
    Field eig_rhs(dom, 0.0);
    for (std::size_t i = 0; i < out.e_p.size(); ++i)
        eig_rhs.values[i] = lambda * std::pow(out.e_p[i], p - 1.0);
    out.rayleigh_residual = pde_residual_sup(dom, p, out.e_p, eig_rhs, cfg.eps_reg);
    return out;
}

/// Comparison-principle consistency of the computed pair with the torsion
/// max: lambda_p^{1/(p-1)} * ||torsion||_inf must be at least one.
inline bool check_eigen_torsion_bound(const EigenPair& eig, double torsion_sup, double p) {
    return std::pow(eig.lambda_p, 1.0 / (p - 1.0)) * torsion_sup >= 1.0 - 1e-8;
}

}  // namespace plap
