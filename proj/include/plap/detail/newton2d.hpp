#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "plap/detail/flux.hpp"
#include "plap/domain.hpp"
#include "plap/errors.hpp"

namespace plap::detail {

/// Rectangle discretization: per mesh cell the gradient is sampled at the
/// four corners from the adjacent edge differences, and the cell energy is
/// the average of the four corner densities. For p = 2 this collapses to the
/// classical 5-point stencil; for general p it stays the gradient of a
/// strictly convex energy, so Newton is again convex minimization.
class Problem2D {
public:
    Problem2D(const Domain& d, const std::vector<double>& load, Flux flux)
        : dom_(d), load_(load), flux_(flux), n_(d.nx()), hx_(d.spacing()), hy_(d.spacing_y()) {
        const std::size_t ni = n_ - 2;
        unknowns_ = ni * ni;
        idx_.assign(n_ * n_, -1);
        for (std::size_t j = 1; j + 1 < n_; ++j)
            for (std::size_t i = 1; i + 1 < n_; ++i)
                idx_[d.flat_index(i, j)] = int((j - 1) * ni + (i - 1));
    }

    std::size_t unknowns() const { return unknowns_; }

    double energy(const std::vector<double>& v) const {
        const double w = 0.25 * hx_ * hy_;
        double e = 0.0;
        for (std::size_t j = 0; j + 1 < n_; ++j)
            for (std::size_t i = 0; i + 1 < n_; ++i) {
                const double va = v[dom_.flat_index(i, j)];
                const double vb = v[dom_.flat_index(i + 1, j)];
                const double vc = v[dom_.flat_index(i, j + 1)];
                const double vd = v[dom_.flat_index(i + 1, j + 1)];
                const double ex_lo = (vb - va) / hx_, ex_hi = (vd - vc) / hx_;
                const double ey_lo = (vc - va) / hy_, ey_hi = (vd - vb) / hy_;
                e += w * (flux_.psi(ex_lo, ey_lo) + flux_.psi(ex_lo, ey_hi) +
                          flux_.psi(ex_hi, ey_lo) + flux_.psi(ex_hi, ey_hi));
            }
        for (std::size_t k = 0; k < v.size(); ++k)
            if (idx_[k] >= 0) e -= load_[k] * v[k];
        return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
    }

    void residual(const std::vector<double>& v, Eigen::VectorXd& out) const {
        out.setZero(Eigen::Index(unknowns_));
        for_each_corner(v, [&](const std::size_t nodes[3], const double rx[3],
                               const double ry[3], double gx, double gy, double w) {
            const double a = flux_.a(gx, gy);
            for (int t = 0; t < 3; ++t) {
                const int k = idx_[nodes[t]];
                if (k >= 0) out[k] += w * a * (gx * rx[t] + gy * ry[t]);
            }
        });
        for (std::size_t k = 0; k < v.size(); ++k)
            if (idx_[k] >= 0) out[idx_[k]] -= load_[k];
    }

    void hessian(const std::vector<double>& v, Eigen::SparseMatrix<double>& out) const {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(36 * (n_ - 1) * (n_ - 1));
        for_each_corner(v, [&](const std::size_t nodes[3], const double rx[3],
                               const double ry[3], double gx, double gy, double w) {
            const double a = flux_.a(gx, gy);
            const double da2 = 2.0 * flux_.da(gx, gy);
            double dir[3];
            for (int t = 0; t < 3; ++t) dir[t] = gx * rx[t] + gy * ry[t];
            for (int s = 0; s < 3; ++s) {
                const int ks = idx_[nodes[s]];
                if (ks < 0) continue;
                for (int t = 0; t < 3; ++t) {
                    const int kt = idx_[nodes[t]];
                    if (kt < 0) continue;
                    const double val =
                        w * (a * (rx[s] * rx[t] + ry[s] * ry[t]) + da2 * dir[s] * dir[t]);
                    trips.emplace_back(ks, kt, val);
                }
            }
        });
        out.resize(Eigen::Index(unknowns_), Eigen::Index(unknowns_));
        out.setFromTriplets(trips.begin(), trips.end());
    }

    double strong_residual_sup(const std::vector<double>& v) const {
        Eigen::VectorXd f;
        residual(v, f);
        double r = 0.0;
        const auto& mass = dom_.node_masses();
        for (std::size_t k = 0; k < v.size(); ++k)
            if (idx_[k] >= 0) r = std::max(r, std::abs(f[idx_[k]]) / mass[k]);
        return r;
    }

    const std::vector<int>& index_map() const { return idx_; }

private:
    template <class F>
    void for_each_corner(const std::vector<double>& v, F&& visit) const {
        const double w = 0.25 * hx_ * hy_;
        const double ax = 1.0 / hx_, ay = 1.0 / hy_;
        for (std::size_t j = 0; j + 1 < n_; ++j)
            for (std::size_t i = 0; i + 1 < n_; ++i) {
                const std::size_t A = dom_.flat_index(i, j);
                const std::size_t B = dom_.flat_index(i + 1, j);
                const std::size_t C = dom_.flat_index(i, j + 1);
                const std::size_t D = dom_.flat_index(i + 1, j + 1);
                const double ex_lo = (v[B] - v[A]) * ax, ex_hi = (v[D] - v[C]) * ax;
                const double ey_lo = (v[C] - v[A]) * ay, ey_hi = (v[D] - v[B]) * ay;
                {
                    const std::size_t nodes[3] = {A, B, C};
                    const double rx[3] = {-ax, ax, 0.0}, ry[3] = {-ay, 0.0, ay};
                    visit(nodes, rx, ry, ex_lo, ey_lo, w);
                }
                {
                    const std::size_t nodes[3] = {A, B, D};
                    const double rx[3] = {-ax, ax, 0.0}, ry[3] = {0.0, -ay, ay};
                    visit(nodes, rx, ry, ex_lo, ey_hi, w);
                }
                {
                    const std::size_t nodes[3] = {A, C, D};
                    const double rx[3] = {0.0, -ax, ax}, ry[3] = {-ay, ay, 0.0};
                    visit(nodes, rx, ry, ex_hi, ey_lo, w);
                }
                {
                    const std::size_t nodes[3] = {B, C, D};
                    const double rx[3] = {0.0, -ax, ax}, ry[3] = {-ay, 0.0, ay};
                    visit(nodes, rx, ry, ex_hi, ey_hi, w);
                }
            }
    }

    const Domain& dom_;
    const std::vector<double>& load_;
    Flux flux_;
    std::size_t n_;
    double hx_, hy_;
    std::size_t unknowns_ = 0;
    std::vector<int> idx_;
};

struct NewtonOutcome2D {
    bool converged = false;
    int iterations = 0;
    double increment_sup = std::numeric_limits<double>::infinity();
    double strong_residual = std::numeric_limits<double>::infinity();
};

/// Same acceptance and stopping rules as the 1D loop; see newton1d.hpp.
inline NewtonOutcome2D newton_2d(const Problem2D& prob, std::vector<double>& v, double tol,
                                 int max_iters, double strong_cap) {
    NewtonOutcome2D out;
    Eigen::VectorXd grad, step;
    Eigen::SparseMatrix<double> hess;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    const auto& idx = prob.index_map();
    std::vector<double> trial(v.size());
    double e = prob.energy(v);
    bool analyzed = false;
    out.strong_residual = prob.strong_residual_sup(v);
    for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
        if (out.strong_residual <= tol) {
            out.converged = true;
            out.increment_sup = 0.0;
            return out;
        }
        prob.residual(v, grad);
        prob.hessian(v, hess);
        if (!analyzed) {
            ldlt.analyzePattern(hess);
            analyzed = true;
        }
        ldlt.factorize(hess);
        if (ldlt.info() != Eigen::Success)
            throw internal_error("newton_2d: indefinite stiffness matrix");
        step = ldlt.solve(grad);
        const double slope = -grad.dot(step);
        double t = 1.0;
        bool accepted = false;
        while (t > 1e-18) {
            trial = v;
            for (std::size_t k = 0; k < v.size(); ++k)
                if (idx[k] >= 0) trial[k] -= t * step[idx[k]];
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
            // Numerical optimum of the convex energy; see newton1d.hpp.
            out.converged = out.strong_residual <= strong_cap;
            if (out.converged) out.increment_sup = 0.0;
            return out;
        }
        out.increment_sup = t * step.cwiseAbs().maxCoeff();
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
