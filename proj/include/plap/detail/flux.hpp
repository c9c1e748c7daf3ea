#pragma once

#include <cmath>

namespace plap::detail {

/// Regularized scalar flux of the degenerate gradient operator:
/// density phi(t) = (t^2 + eps^2)^{p/2} / p, flux q = phi', stiffness dq = q'.
/// dq > 0 for every p > 1, so the cell energies below are strictly convex.
struct Flux {
    double p;
    double eps2;

    Flux(double p_, double eps) : p(p_), eps2(eps * eps) {}

    double phi(double t) const { return std::pow(t * t + eps2, 0.5 * p) / p; }
    double q(double t) const { return t * std::pow(t * t + eps2, 0.5 * (p - 2.0)); }
    double dq(double t) const {
        const double s = t * t + eps2;
        return std::pow(s, 0.5 * (p - 4.0)) * ((p - 1.0) * t * t + eps2);
    }

    // Vector version for 2D cells: density psi(g) = (|g|^2 + eps^2)^{p/2} / p,
    // grad psi = a(g) g, hess psi = a I + 2 a' g g^T.
    double a(double gx, double gy) const {
        return std::pow(gx * gx + gy * gy + eps2, 0.5 * (p - 2.0));
    }
    double da(double gx, double gy) const {
        return 0.5 * (p - 2.0) * std::pow(gx * gx + gy * gy + eps2, 0.5 * (p - 4.0));
    }
    double psi(double gx, double gy) const {
        return std::pow(gx * gx + gy * gy + eps2, 0.5 * p) / p;
    }
};

}  // namespace plap::detail
