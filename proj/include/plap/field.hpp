#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "plap/domain.hpp"
#include "plap/errors.hpp"

namespace plap {

/// A scalar function sampled at mesh nodes (boundary nodes included).
/// Treated as immutable once built; all operations below are pure.
struct Field {
    DomainPtr domain;
    std::vector<double> values;
    std::string label;

    Field() = default;
    Field(DomainPtr d, double fill = 0.0, std::string lbl = {})
        : domain(std::move(d)), values(domain->num_nodes(), fill), label(std::move(lbl)) {}
    Field(DomainPtr d, std::vector<double> vals, std::string lbl = {})
        : domain(std::move(d)), values(std::move(vals)), label(std::move(lbl)) {
        if (values.size() != domain->num_nodes())
            throw internal_error("Field: value count does not match mesh");
    }

    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    bool all_finite() const {
        return std::all_of(values.begin(), values.end(),
                           [](double v) { return std::isfinite(v); });
    }

    bool dirichlet_zero() const {
        for (std::size_t k = 0; k < values.size(); ++k)
            if (domain->is_boundary_node(k) && values[k] != 0.0) return false;
        return true;
    }

    void zero_boundary() {
        for (std::size_t k = 0; k < values.size(); ++k)
            if (domain->is_boundary_node(k)) values[k] = 0.0;
    }
};

/// Exact distance to the boundary, sampled at nodes. Boundary nodes are
/// exactly zero.
inline Field distance_function(const DomainPtr& dom) {
    Field f(dom, 0.0, "distance");
    const Domain& d = *dom;
    if (d.shape() == Shape::interval) {
        for (std::size_t i = 0; i < d.num_nodes(); ++i)
            f.values[i] = std::max(0.0, std::min(d.node(i) - d.x_lo(), d.x_hi() - d.node(i)));
    } else if (d.shape() == Shape::ball) {
        for (std::size_t i = 0; i < d.num_nodes(); ++i)
            f.values[i] = std::max(0.0, d.radius() - d.node(i));
    } else {
        for (std::size_t j = 0; j < d.ny(); ++j)
            for (std::size_t i = 0; i < d.nx(); ++i) {
                const double x = d.node_x(i), y = d.node_y(j);
                const double v = std::min(std::min(x - d.x_lo(), d.x_hi() - x),
                                          std::min(y - d.y_lo(), d.y_hi() - y));
                f.values[d.flat_index(i, j)] = std::max(0.0, v);
            }
    }
    f.zero_boundary();
    return f;
}

inline double sup_norm(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double sup_diff(const Field& a, const Field& b) {
    if (a.size() != b.size()) throw internal_error("sup_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// L^t norm by the mesh quadrature (radial weight included on balls).
inline double lp_norm(const Field& f, double t) {
    if (!(t >= 1.0)) throw config_error("lp_norm: exponent must be >= 1");
    const auto& w = f.domain->node_masses();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * std::pow(std::abs(f[i]), t);
    return std::pow(acc, 1.0 / t);
}

/// Gradient magnitude at every node: central differences in the interior,
/// one-sided at the boundary.
inline std::vector<double> node_gradient_magnitude(const Field& f) {
    const Domain& d = *f.domain;
    std::vector<double> g(f.size(), 0.0);
    if (!d.is_2d()) {
        const std::size_t n = d.num_nodes();
        const double h = d.spacing();
        for (std::size_t i = 0; i < n; ++i) {
            double der;
            if (i == 0)
                der = (f[1] - f[0]) / h;
            else if (i + 1 == n)
                der = (f[n - 1] - f[n - 2]) / h;
            else
                der = (f[i + 1] - f[i - 1]) / (2.0 * h);
            g[i] = std::abs(der);
        }
    } else {
        const std::size_t n = d.nx();
        const double hx = d.spacing(), hy = d.spacing_y();
        const auto at = [&](std::size_t i, std::size_t j) { return f[d.flat_index(i, j)]; };
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                double gx, gy;
                if (i == 0)
                    gx = (at(1, j) - at(0, j)) / hx;
                else if (i + 1 == n)
                    gx = (at(n - 1, j) - at(n - 2, j)) / hx;
                else
                    gx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * hx);
                if (j == 0)
                    gy = (at(i, 1) - at(i, 0)) / hy;
                else if (j + 1 == n)
                    gy = (at(i, n - 1) - at(i, n - 2)) / hy;
                else
                    gy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy);
                g[d.flat_index(i, j)] = std::hypot(gx, gy);
            }
    }
    return g;
}

inline double grad_sup(const Field& f) {
    const auto g = node_gradient_magnitude(f);
    return *std::max_element(g.begin(), g.end());
}

/// Integral of |grad v|^p under the same cell-based gradient rule the solver
/// discretizes with, so energies and Rayleigh quotients are consistent with
/// the discrete problem.
inline double grad_lp_pow(const Field& f, double p) {
    const Domain& d = *f.domain;
    double acc = 0.0;
    if (!d.is_2d()) {
        const double h = d.spacing();
        const auto& cw = d.cell_masses();
        for (std::size_t c = 0; c + 1 < d.num_nodes(); ++c) {
            const double slope = (f[c + 1] - f[c]) / h;
            acc += cw[c] * std::pow(std::abs(slope), p);
        }
    } else {
        const std::size_t n = d.nx();
        const double hx = d.spacing(), hy = d.spacing_y();
        const double quarter = 0.25 * hx * hy;
        const auto at = [&](std::size_t i, std::size_t j) { return f[d.flat_index(i, j)]; };
        for (std::size_t j = 0; j + 1 < n; ++j)
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double ex_lo = (at(i + 1, j) - at(i, j)) / hx;
                const double ex_hi = (at(i + 1, j + 1) - at(i, j + 1)) / hx;
                const double ey_lo = (at(i, j + 1) - at(i, j)) / hy;
                const double ey_hi = (at(i + 1, j + 1) - at(i + 1, j)) / hy;
                acc += quarter * (std::pow(std::hypot(ex_lo, ey_lo), p) +
                                  std::pow(std::hypot(ex_lo, ey_hi), p) +
                                  std::pow(std::hypot(ex_hi, ey_lo), p) +
                                  std::pow(std::hypot(ex_hi, ey_hi), p));
            }
    }
    return acc;
}

/// Describes the functional
///   (1/p) * int |grad v|^p  -  (lambda/q) * int |v|^q  -  int forcing * v
/// whose positive critical points solve the frozen-forcing problem.
struct EnergySpec {
    double p;
    double q;
    double lambda;
    Field forcing;

    void validate() const {
        if (!(p > 1.0)) throw config_error("EnergySpec: p must exceed 1");
        if (!(q >= 1.0)) throw config_error("EnergySpec: q must be >= 1");
        if (!(p > q)) throw config_error("EnergySpec: p must exceed q");
        if (lambda < 0) throw config_error("EnergySpec: lambda must be nonnegative");
    }
};

/// Value of the functional above. A non-finite result signals an invalid
/// field; it is returned as computed so callers can detect it.
inline double energy(const EnergySpec& spec, const Field& v) {
    spec.validate();
    const auto& w = v.domain->node_masses();
    double bulk = 0.0, load = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        bulk += w[i] * std::pow(std::abs(v[i]), spec.q);
        load += w[i] * spec.forcing[i] * v[i];
    }
    return grad_lp_pow(v, spec.p) / spec.p - spec.lambda / spec.q * bulk - load;
}

}  // namespace plap
