#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "plap/domain.hpp"
#include "plap/field.hpp"

using namespace plap;
using Catch::Approx;

TEST_CASE("domain construction and invariants", "[geometry]") {
    const auto ball = make_ball(0, 1, 2, 65);
    CHECK(ball->volume() == Approx(std::numbers::pi).epsilon(1e-13));
    CHECK(ball->unit_ball_vol() == Approx(std::numbers::pi).epsilon(1e-13));

    const auto ball3 = make_ball(0, 2, 3, 65);
    CHECK(ball3->volume() == Approx(4.0 / 3.0 * std::numbers::pi * 8.0).epsilon(1e-13));

    const auto iv = make_interval(0.3, 1.1, 65);
    CHECK(iv->volume() == Approx(0.8).epsilon(1e-13));
    CHECK(iv->node(64) == 1.1);  // last node lands exactly on the endpoint

    const auto rect = make_rectangle(0, 2, 0, 1, 33);
    CHECK(rect->volume() == Approx(2.0).epsilon(1e-13));

    CHECK_THROWS_AS(Domain::interval(0, 1, 2), config_error);
    CHECK_THROWS_AS(Domain::interval(1, 0, 65), config_error);
    CHECK_THROWS_AS(Domain::ball(0, -1, 2, 65), config_error);
    CHECK_THROWS_AS(Domain::ball(0, 1, 0, 65), config_error);
}

TEST_CASE("node masses integrate the honest measure", "[geometry]") {
    // Sum of node masses equals the volume for every shape.
    for (const auto& dom : {make_interval(0, 1, 129), make_ball(0, 1, 2, 129),
                            make_ball(0, 1.5, 3, 129), make_rectangle(0, 2, 0, 1, 33)}) {
        double total = 0;
        for (double w : dom->node_masses()) total += w;
        CHECK(total == Approx(dom->volume()).epsilon(1e-12));
    }
}

TEST_CASE("distance function examples", "[geometry]") {
    const auto iv = make_interval(0, 1, 1025);
    const auto d_iv = distance_function(iv);
    CHECK(d_iv[512] == Approx(0.5).margin(1e-15));

    const auto ball = make_ball(0, 1, 2, 1025);
    const auto d_ball = distance_function(ball);
    CHECK(d_ball[0] == 1.0);

    const auto rect = make_rectangle(0, 2, 0, 1, 65);
    const auto d_rect = distance_function(rect);
    CHECK(d_rect[rect->flat_index(32, 32)] == Approx(0.5).margin(1e-15));

    for (const auto& d : {d_iv, d_ball, d_rect}) CHECK(d.dirichlet_zero());
}

TEST_CASE("distance function is 1-Lipschitz across adjacent nodes", "[geometry]") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> U(0.2, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto dom = make_ball(0, U(rng), 2 + trial % 2, 257);
        const auto d = distance_function(dom);
        const double h = dom->spacing();
        for (std::size_t i = 0; i + 1 < d.size(); ++i)
            REQUIRE(std::abs(d[i + 1] - d[i]) <= h * (1 + 1e-12));
    }
    const auto rect = make_rectangle(0, 1.7, 0, 0.9, 65);
    const auto d = distance_function(rect);
    for (std::size_t j = 0; j < rect->ny(); ++j)
        for (std::size_t i = 0; i + 1 < rect->nx(); ++i)
            REQUIRE(std::abs(d[rect->flat_index(i + 1, j)] - d[rect->flat_index(i, j)]) <=
                    rect->spacing() * (1 + 1e-12));
}

TEST_CASE("norm examples", "[geometry]") {
    const auto ball = make_ball(0, 1, 2, 1025);
    CHECK(sup_norm(distance_function(ball)) == 1.0);

    const auto iv = make_interval(0, 1, 1025);
    CHECK(grad_sup(distance_function(iv)) == Approx(1.0).margin(1e-12));

    Field one(iv, 1.0);
    CHECK(lp_norm(one, 2.0) == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(lp_norm(one, 0.5), config_error);
}

TEST_CASE("quadrature converges at second order", "[geometry]") {
    // || sin ||_2 on (0,1): exact value sqrt(1/2 - sin(2)/4).
    const double exact = std::sqrt(0.5 - std::sin(2.0) / 4.0);
    const auto err_at = [&](std::size_t n) {
        const auto dom = make_interval(0, 1, n);
        Field f(dom, 0.0);
        for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = std::sin(dom->node(i));
        return std::abs(lp_norm(f, 2.0) - exact);
    };
    const double e1 = err_at(65), e2 = err_at(129);
    CHECK(e2 < e1 / 3.5);  // order >= 2 up to rounding
}

TEST_CASE("gradient sup scales absolutely homogeneously", "[geometry]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    const auto dom = make_ball(0, 1, 2, 129);
    Field f(dom, 0.0);
    for (auto& v : f.values) v = U(rng);
    const double base = grad_sup(f);
    for (double c : {-3.0, -0.5, 0.0, 0.25, 10.0}) {
        Field g = f;
        for (auto& v : g.values) v *= c;
        REQUIRE(grad_sup(g) == Approx(std::abs(c) * base).margin(1e-12 * (1 + base)));
    }
}

TEST_CASE("energy functional values", "[geometry]") {
    const auto iv = make_interval(0, 1, 2049);
    const EnergySpec spec{2.0, 1.0, 1.0, Field(iv, 0.0)};

    Field zero(iv, 0.0);
    CHECK(energy(spec, zero) == 0.0);

    // The p=2 torsion profile x(1-x)/2 has energy -1/24 for q=1, lambda=1.
    Field tor(iv, 0.0);
    for (std::size_t i = 0; i < tor.size(); ++i) {
        const double x = iv->node(i);
        tor.values[i] = 0.5 * x * (1.0 - x);
    }
    CHECK(energy(spec, tor) == Approx(-1.0 / 24.0).margin(1e-8));

    CHECK_THROWS_AS(energy(EnergySpec{2.0, 3.0, 1.0, Field(iv, 0.0)}, zero), config_error);
}
