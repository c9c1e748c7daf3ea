#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "plap/errors.hpp"

namespace plap {

enum class Shape { interval, ball, rectangle };

inline std::string to_string(Shape s) {
    switch (s) {
        case Shape::interval: return "interval";
        case Shape::ball: return "ball";
        case Shape::rectangle: return "rectangle";
    }
    return "?";
}

/// Volume of the unit ball in R^N.
inline double unit_ball_volume(int dim) {
    if (dim < 1) throw config_error("unit_ball_volume: dimension must be >= 1");
    return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

/// A desk-scale computational domain: 1D interval, radial N-ball, or 2D
/// tensor rectangle. Balls are stored as their radial reduction, a uniform
/// mesh on [0, R] whose quadrature weights carry the r^{N-1} measure (times
/// the angular factor), so that integrals over fields match the honest
/// N-dimensional integrals. Immutable after construction.
class Domain {
public:
    static Domain interval(double x_lo, double x_hi, std::size_t resolution = 1025) {
        Domain d;
        d.shape_ = Shape::interval;
        d.x_lo_ = x_lo;
        d.x_hi_ = x_hi;
        d.dim_ = 1;
        d.res_ = resolution;
        d.validate_common();
        if (!(x_hi > x_lo)) throw config_error("interval: x_hi must exceed x_lo");
        d.volume_ = x_hi - x_lo;
        d.omega_n_ = unit_ball_volume(1);
        d.build_1d_quadrature();
        return d;
    }

    static Domain ball(double center, double radius, int dim, std::size_t resolution = 1025) {
        Domain d;
        d.shape_ = Shape::ball;
        d.center_ = center;
        d.radius_ = radius;
        d.dim_ = dim;
        d.res_ = resolution;
        d.x_lo_ = 0.0;
        d.x_hi_ = radius;
        d.validate_common();
        if (!(radius > 0)) throw config_error("ball: radius must be positive");
        if (dim < 1) throw config_error("ball: dimension must be >= 1");
        d.omega_n_ = unit_ball_volume(dim);
        d.volume_ = d.omega_n_ * std::pow(radius, dim);
        d.build_1d_quadrature();
        return d;
    }

    static Domain rectangle(double x_lo, double x_hi, double y_lo, double y_hi,
                            std::size_t resolution = 129) {
        Domain d;
        d.shape_ = Shape::rectangle;
        d.x_lo_ = x_lo;
        d.x_hi_ = x_hi;
        d.y_lo_ = y_lo;
        d.y_hi_ = y_hi;
        d.dim_ = 2;
        d.res_ = resolution;
        d.validate_common();
        if (!(x_hi > x_lo) || !(y_hi > y_lo))
            throw config_error("rectangle: upper bounds must exceed lower bounds");
        d.volume_ = (x_hi - x_lo) * (y_hi - y_lo);
        d.omega_n_ = unit_ball_volume(2);
        d.build_2d_quadrature();
        return d;
    }

    Shape shape() const { return shape_; }
    int dim() const { return dim_; }
    std::size_t resolution() const { return res_; }
    bool is_2d() const { return shape_ == Shape::rectangle; }

    double volume() const { return volume_; }
    double unit_ball_vol() const { return omega_n_; }

    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    double y_lo() const { return y_lo_; }
    double y_hi() const { return y_hi_; }
    double radius() const { return radius_; }
    double center() const { return center_; }

    std::size_t num_nodes() const { return is_2d() ? res_ * res_ : res_; }
    std::size_t nx() const { return res_; }
    std::size_t ny() const { return is_2d() ? res_ : 1; }

    double spacing() const { return (x_hi_ - x_lo_) / double(res_ - 1); }
    double spacing_y() const { return is_2d() ? (y_hi_ - y_lo_) / double(res_ - 1) : 0.0; }

    /// 1D / radial node coordinate. The last node lands exactly on x_hi.
    double node(std::size_t i) const {
        return (i + 1 == res_) ? x_hi_ : x_lo_ + double(i) * spacing();
    }
    double node_x(std::size_t i) const { return node(i); }
    double node_y(std::size_t j) const {
        return (j + 1 == res_) ? y_hi_ : y_lo_ + double(j) * spacing_y();
    }

    std::size_t flat_index(std::size_t i, std::size_t j) const { return j * res_ + i; }

    bool is_boundary_node(std::size_t k) const {
        if (shape_ == Shape::interval) return k == 0 || k + 1 == res_;
        if (shape_ == Shape::ball) return k + 1 == res_;
        const std::size_t i = k % res_, j = k / res_;
        return i == 0 || i + 1 == res_ || j == 0 || j + 1 == res_;
    }

    /// Quadrature weight of each node under the honest N-dimensional measure.
    const std::vector<double>& node_masses() const { return node_mass_; }

    /// 1D/radial only: measure of each mesh cell [x_i, x_{i+1}].
    const std::vector<double>& cell_masses() const { return cell_mass_; }

private:
    Domain() = default;

    void validate_common() const {
        if (res_ < 3) throw config_error("domain: resolution must be >= 3");
    }

    void build_1d_quadrature() {
        const std::size_t n = res_;
        const double h = spacing();
        cell_mass_.resize(n - 1);
        node_mass_.assign(n, 0.0);
        if (shape_ == Shape::interval) {
            for (std::size_t c = 0; c + 1 < n; ++c) cell_mass_[c] = h;
            node_mass_.front() = node_mass_.back() = 0.5 * h;
            for (std::size_t i = 1; i + 1 < n; ++i) node_mass_[i] = h;
        } else {
            // Exact slab masses omega_N * (r_hi^N - r_lo^N); dual cells for nodes.
            const auto slab = [&](double r_lo, double r_hi) {
                return omega_n_ * (std::pow(r_hi, dim_) - std::pow(r_lo, dim_));
            };
            for (std::size_t c = 0; c + 1 < n; ++c) cell_mass_[c] = slab(node(c), node(c + 1));
            for (std::size_t i = 0; i < n; ++i) {
                const double lo = (i == 0) ? 0.0 : 0.5 * (node(i - 1) + node(i));
                const double hi = (i + 1 == n) ? radius_ : 0.5 * (node(i) + node(i + 1));
                node_mass_[i] = slab(lo, hi);
            }
        }
    }

    void build_2d_quadrature() {
        const std::size_t n = res_;
        const double hx = spacing(), hy = spacing_y();
        std::vector<double> wx(n, hx), wy(n, hy);
        wx.front() = wx.back() = 0.5 * hx;
        wy.front() = wy.back() = 0.5 * hy;
        node_mass_.resize(n * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) node_mass_[flat_index(i, j)] = wx[i] * wy[j];
    }

    Shape shape_ = Shape::interval;
    int dim_ = 1;
    std::size_t res_ = 0;
    double x_lo_ = 0, x_hi_ = 0, y_lo_ = 0, y_hi_ = 0;
    double center_ = 0, radius_ = 0;
    double volume_ = 0, omega_n_ = 0;
    std::vector<double> node_mass_;
    std::vector<double> cell_mass_;
};

using DomainPtr = std::shared_ptr<const Domain>;

inline DomainPtr make_interval(double x_lo, double x_hi, std::size_t resolution = 1025) {
    return std::make_shared<const Domain>(Domain::interval(x_lo, x_hi, resolution));
}
inline DomainPtr make_ball(double center, double radius, int dim, std::size_t resolution = 1025) {
    return std::make_shared<const Domain>(Domain::ball(center, radius, dim, resolution));
}
inline DomainPtr make_rectangle(double x_lo, double x_hi, double y_lo, double y_hi,
                                std::size_t resolution = 129) {
    return std::make_shared<const Domain>(
        Domain::rectangle(x_lo, x_hi, y_lo, y_hi, resolution));
}

}  // namespace plap
