#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "plap/detail/flux.hpp"
#include "plap/domain.hpp"
#include "plap/errors.hpp"

namespace plap::detail {

/// Uniform 1D/radial mesh with the measure-weighted quadrature masses and
/// the unknown (non-Dirichlet) node range. Balls keep the center node as an
/// unknown; the zero-flux symmetry condition at r = 0 is built into the
/// energy (the first cell carries the only flux touching the center).
struct Mesh1D {
    std::size_t n = 0;
    double h = 0;
    std::vector<double> cell_mass;  // n-1, measure of [x_c, x_{c+1}]
    std::vector<double> node_mass;  // n, dual-cell measure
    std::size_t u_begin = 0, u_end = 0;

    static Mesh1D from(const Domain& d) {
        Mesh1D m;
        m.n = d.num_nodes();
        m.h = d.spacing();
        m.cell_mass = d.cell_masses();
        m.node_mass = d.node_masses();
        m.u_begin = (d.shape() == Shape::ball) ? 0 : 1;
        m.u_end = m.n - 1;
        return m;
    }
};

/// Tridiagonal solve (Thomas). The matrices here are symmetric M-matrices,
/// so no pivoting is needed.
inline void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t m = diag.size();
    for (std::size_t i = 1; i < m; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[m - 1] /= diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

/// The discrete convex energy
///   E(v) = sum_c cell_mass[c] * phi((v[c+1]-v[c])/h) - sum_i load[i] * v[i]
/// whose gradient is the finite-volume form of the problem. Newton on the
/// gradient is therefore minimization of a strictly convex functional.
class Problem1D {
public:
    Problem1D(const Mesh1D& mesh, const std::vector<double>& load, Flux flux)
        : mesh_(mesh), load_(load), flux_(flux) {}

    double energy(const std::vector<double>& v) const {
        double e = 0.0;
        for (std::size_t c = 0; c + 1 < mesh_.n; ++c) {
            e += mesh_.cell_mass[c] * flux_.phi((v[c + 1] - v[c]) / mesh_.h);
        }
        for (std::size_t i = mesh_.u_begin; i < mesh_.u_end; ++i) e -= load_[i] * v[i];
        return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
    }

    // Gradient of the energy at the unknown nodes.
    void residual(const std::vector<double>& v, std::vector<double>& out) const {
        out.assign(mesh_.u_end - mesh_.u_begin, 0.0);
        for (std::size_t i = mesh_.u_begin; i < mesh_.u_end; ++i) {
            double f = -load_[i];
            if (i > 0) f += mesh_.cell_mass[i - 1] * flux_.q((v[i] - v[i - 1]) / mesh_.h) / mesh_.h;
            f -= mesh_.cell_mass[i] * flux_.q((v[i + 1] - v[i]) / mesh_.h) / mesh_.h;
            out[i - mesh_.u_begin] = f;
        }
    }

    void hessian(const std::vector<double>& v, std::vector<double>& lower,
                 std::vector<double>& diag, std::vector<double>& upper) const {
        const std::size_t m = mesh_.u_end - mesh_.u_begin;
        lower.assign(m, 0.0);
        diag.assign(m, 0.0);
        upper.assign(m, 0.0);
        const double h2 = mesh_.h * mesh_.h;
        for (std::size_t i = mesh_.u_begin; i < mesh_.u_end; ++i) {
            const std::size_t k = i - mesh_.u_begin;
            if (i > 0) {
                const double s = mesh_.cell_mass[i - 1] * flux_.dq((v[i] - v[i - 1]) / mesh_.h) / h2;
                diag[k] += s;
                if (k > 0) lower[k] = -s;
            }
            const double s = mesh_.cell_mass[i] * flux_.dq((v[i + 1] - v[i]) / mesh_.h) / h2;
            diag[k] += s;
            if (i + 1 < mesh_.u_end) upper[k] = -s;
        }
    }

    /// Pointwise (strong-form) residual sup-norm: gradient entries divided by
    /// the dual-cell masses.
    double strong_residual_sup(const std::vector<double>& v) const {
        double r = 0.0;
        std::vector<double> f;
        residual(v, f);
        for (std::size_t i = mesh_.u_begin; i < mesh_.u_end; ++i)
            r = std::max(r, std::abs(f[i - mesh_.u_begin]) / mesh_.node_mass[i]);
        return r;
    }

    const Mesh1D& mesh() const { return mesh_; }

private:
    const Mesh1D& mesh_;
    const std::vector<double>& load_;
    Flux flux_;
};

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double increment_sup = std::numeric_limits<double>::infinity();
    double strong_residual = std::numeric_limits<double>::infinity();
};

/// Damped Newton with backtracking. A step is accepted on genuine energy
/// descent (Armijo, the global guarantee on the convex energy) or on strict
/// residual decrease, which carries the iteration through the final digits
/// where the remaining energy gap underflows double precision.
///
/// Convergence is declared on the strong residual when it reaches tol, or --
/// since that residual has a roundoff floor of order eps/h at fine meshes --
/// on a full Newton step whose increment is below tol while the strong
/// residual sits under strong_cap.
inline NewtonOutcome newton_1d(const Problem1D& prob, std::vector<double>& v, double tol,
                               int max_iters, double strong_cap) {
    const Mesh1D& mesh = prob.mesh();
    std::vector<double> grad, lower, diag, upper, step, trial(v.size());
    NewtonOutcome out;
    double e = prob.energy(v);
    out.strong_residual = prob.strong_residual_sup(v);
    for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
        if (out.strong_residual <= tol) {
            out.converged = true;
            out.increment_sup = 0.0;
            return out;
        }
        prob.residual(v, grad);
        prob.hessian(v, lower, diag, upper);
        step = grad;
        solve_tridiagonal(lower, diag, upper, step);  // step = H^{-1} grad
        double slope = 0.0;                           // grad . (-step)
        for (std::size_t k = 0; k < grad.size(); ++k) slope -= grad[k] * step[k];
        double t = 1.0;
        bool accepted = false;
        while (t > 1e-18) {
            trial = v;
            for (std::size_t k = 0; k < step.size(); ++k)
                trial[mesh.u_begin + k] -= t * step[k];
            const double e_trial = prob.energy(trial);
            const double res_trial = prob.strong_residual_sup(trial);
            if ((e_trial <= e + 1e-4 * t * slope && e_trial < e) ||
                res_trial <= (1.0 - 1e-4 * t) * out.strong_residual) {
                v.swap(trial);
                e = e_trial;
                out.strong_residual = res_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No step can improve the convex energy or the residual in double
            // precision: the iterate is the numerical optimum and the
            // remaining representable increment is zero.
            out.converged = out.strong_residual <= strong_cap;
            if (out.converged) out.increment_sup = 0.0;
            return out;
        }
        double raw = 0.0;
        for (double s : step) raw = std::max(raw, std::abs(s));
        out.increment_sup = t * raw;
        if (out.strong_residual <= tol ||
            (t == 1.0 && out.increment_sup <= tol && out.strong_residual <= strong_cap)) {
            out.converged = true;
            ++out.iterations;
            return out;
        }
    }
    out.converged = out.strong_residual <= tol ||
                    (out.increment_sup <= tol && out.strong_residual <= strong_cap);
    return out;
}

}  // namespace plap::detail
