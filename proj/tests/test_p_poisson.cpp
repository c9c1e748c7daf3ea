#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "plap/p_poisson.hpp"

using namespace plap;
using Catch::Approx;

namespace {
const SolverConfig cfg{};
}

TEST_CASE("exact radial torsion values", "[p_poisson]") {
    CHECK(torsion_exact_ball(2, 1.0, 2.0, 0.0) == Approx(0.25).epsilon(1e-14));
    CHECK(torsion_exact_ball(2, 1.0, 2.0, 1.0) == 0.0);
    CHECK(torsion_exact_ball(1, 1.0, 2.0, 0.0) == Approx(0.5).epsilon(1e-14));
    CHECK(torsion_exact_ball(2, 1.0, 3.0, 0.0) ==
          Approx(2.0 / (3.0 * std::sqrt(2.0))).epsilon(1e-14));
    CHECK_THROWS_AS(torsion_exact_ball(2, 1.0, 2.0, 1.5), config_error);
}

TEST_CASE("symmetrized torsion max bound", "[p_poisson]") {
    // Balls attain the bound exactly.
    CHECK(torsion_max_bound(2.0, 2, std::numbers::pi, std::numbers::pi) ==
          Approx(0.25).epsilon(1e-14));
    // p=3, N=2, volume 4*pi: the value collapses to 4/3.
    CHECK(torsion_max_bound(3.0, 2, 4.0 * std::numbers::pi, std::numbers::pi) ==
          Approx(4.0 / 3.0).epsilon(1e-13));
    // With volume fixed at the unit-ball volume the bound tends to 1.
    CHECK(torsion_max_bound(1e6, 2, std::numbers::pi, std::numbers::pi) ==
          Approx(1.0).margin(1e-4));
}

TEST_CASE("solver reproduces classical 1D torsion", "[p_poisson]") {
    const auto iv = make_interval(0, 1, 1025);
    Field one(iv, 1.0);
    const auto sol = solve_p_poisson(iv, 2.0, one, cfg);
    REQUIRE(sol.converged);
    double err = 0;
    for (std::size_t i = 0; i < sol.field.size(); ++i) {
        const double x = iv->node(i);
        err = std::max(err, std::abs(sol.field[i] - 0.5 * x * (1.0 - x)));
    }
    CHECK(err < 1e-10);  // the 5-point scheme is exact for quadratics up to rounding
    CHECK(sup_norm(sol.field) == Approx(0.125).margin(1e-10));
}

TEST_CASE("solver matches the exact ball profile", "[p_poisson]") {
    const auto ball = make_ball(0, 1, 2, 1025);
    for (double p : {2.0, 3.0, 5.0}) {
        const auto sol = torsion_function(ball, p, cfg);
        REQUIRE(sol.converged);
        double err = 0;
        for (std::size_t i = 0; i < sol.field.size(); ++i)
            err = std::max(err,
                           std::abs(sol.field[i] - torsion_exact_ball(2, 1.0, p, ball->node(i))));
        CAPTURE(p, err);
        CHECK(err < 1e-4);
        // The disk attains the symmetrization bound with equality, so the
        // discrete max may sit above it by discretization error only.
        CHECK(sup_norm(sol.field) <=
              torsion_max_bound(p, 2, ball->volume(), ball->unit_ball_vol()) + 1e-4);
    }
}

TEST_CASE("ball oracle error decays at the degenerate-center rate", "[p_poisson]") {
    // p = 2 is exact for the quadratic profile; for p > 2 the flux behaves
    // like r^{1/(p-1)} at the center, which caps the sup-error rate at
    // p/(p-1).
    {
        const auto ball = make_ball(0, 1, 2, 257);
        const auto sol = torsion_function(ball, 2.0, cfg);
        double err = 0;
        for (std::size_t i = 0; i < sol.field.size(); ++i)
            err = std::max(err,
                           std::abs(sol.field[i] - torsion_exact_ball(2, 1.0, 2.0, ball->node(i))));
        CHECK(err < 1e-12);
    }
    for (double p : {3.0, 5.0}) {
        const auto err_at = [&](std::size_t n) {
            const auto ball = make_ball(0, 1, 2, n);
            const auto sol = torsion_function(ball, p, cfg);
            REQUIRE(sol.converged);
            double err = 0;
            for (std::size_t i = 0; i < sol.field.size(); ++i)
                err = std::max(
                    err, std::abs(sol.field[i] - torsion_exact_ball(2, 1.0, p, ball->node(i))));
            return err;
        };
        const double e1 = err_at(129), e2 = err_at(257);
        const double rate = std::log2(e1 / e2);
        CAPTURE(p, e1, e2, rate);
        CHECK(rate >= p / (p - 1.0) - 0.15);
        CHECK(e2 < 5e-5);
    }
}

TEST_CASE("interval torsion agrees with the dimension-one profile", "[p_poisson]") {
    const auto iv = make_interval(0, 1, 1025);
    const auto sol = torsion_function(iv, 5.0, cfg);
    REQUIRE(sol.converged);
    // interval (0,1) is the 1-ball of radius 1/2 around 1/2
    CHECK(sup_norm(sol.field) == Approx(torsion_exact_ball(1, 0.5, 5.0, 0.0)).margin(1e-3));
}

TEST_CASE("singular range p < 2 reaches the exact profile", "[p_poisson]") {
    const auto iv = make_interval(0, 1, 1025);
    const auto sol = torsion_function(iv, 1.5, cfg);
    REQUIRE(sol.converged);
    CHECK(sup_norm(sol.field) == Approx(torsion_exact_ball(1, 0.5, 1.5, 0.0)).margin(1e-4));
}

TEST_CASE("warm starts reproduce the cold solution", "[p_poisson]") {
    const auto ball = make_ball(0, 1, 2, 513);
    Field g(ball, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = 1.0 + 0.3 * ball->node(i);
    const auto cold = solve_p_poisson(ball, 12.0, g, cfg);
    REQUIRE(cold.converged);
    Field seed = cold.field;
    for (auto& v : seed.values) v *= 1.05;  // a nearby, not exact, guess
    seed.zero_boundary();
    const auto warm = solve_p_poisson(ball, 12.0, g, cfg, &seed);
    REQUIRE(warm.converged);
    CHECK(warm.iterations < cold.iterations);
    CHECK(sup_diff(warm.field, cold.field) <= 1e-8 * sup_norm(cold.field));
}

TEST_CASE("zero forcing yields the zero solution exactly", "[p_poisson]") {
    const auto ball = make_ball(0, 1, 2, 129);
    Field zero(ball, 0.0);
    const auto sol = solve_p_poisson(ball, 7.0, zero, cfg);
    REQUIRE(sol.converged);
    CHECK(sup_norm(sol.field) == 0.0);
    CHECK(sol.iterations == 0);
}

TEST_CASE("scaling homogeneity is exact by construction", "[p_poisson]") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.1, 4.0);
    const auto ball = make_ball(0, 1, 2, 257);
    Field g(ball, 0.0);
    for (auto& v : g.values) v = U(rng);
    for (double p : {2.0, 5.0, 20.0}) {
        const double c = U(rng);
        Field gc = g;
        for (auto& v : gc.values) v *= c;
        const auto s1 = solve_p_poisson(ball, p, g, cfg);
        const auto sc = solve_p_poisson(ball, p, gc, cfg);
        REQUIRE(s1.converged);
        REQUIRE(sc.converged);
        REQUIRE(s1.residual_sup <= cfg.newton_tol);
        REQUIRE(sc.residual_sup <= cfg.newton_tol);
        const double factor = std::pow(c, 1.0 / (p - 1.0));
        double err = 0;
        for (std::size_t i = 0; i < s1.field.size(); ++i)
            err = std::max(err, std::abs(sc.field[i] - factor * s1.field[i]));
        CAPTURE(p, c, err);
        CHECK(err <= 10.0 * cfg.newton_tol * sup_norm(s1.field) + 1e-15);
    }
}

TEST_CASE("discrete comparison principle on random forcing pairs", "[p_poisson]") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto ball = make_ball(0, 1, 2, 257);
    for (double p : {2.0, 10.0}) {
        for (int trial = 0; trial < 10; ++trial) {
            Field g1(ball, 0.0), g2(ball, 0.0);
            for (std::size_t i = 0; i < g1.size(); ++i) {
                g2.values[i] = U(rng);
                g1.values[i] = g2.values[i] * U(rng);
            }
            const auto s1 = solve_p_poisson(ball, p, g1, cfg);
            const auto s2 = solve_p_poisson(ball, p, g2, cfg);
            REQUIRE(s1.converged);
            REQUIRE(s2.converged);
            for (std::size_t i = 0; i < s1.field.size(); ++i)
                REQUIRE(s1.field[i] <= s2.field[i] + 1e-8);
        }
    }
}

TEST_CASE("solutions stay under the scaled torsion profile", "[p_poisson]") {
    // |solve(g)| <= ||g||^{1/(p-1)} * torsion node-wise, signed g included.
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    const auto ball = make_ball(0, 1, 2, 257);
    for (double p : {2.0, 4.0}) {
        const auto tor = torsion_function(ball, p, cfg);
        Field g(ball, 0.0);
        for (auto& v : g.values) v = U(rng);
        const auto sol = solve_p_poisson(ball, p, g, cfg);
        REQUIRE(sol.converged);
        const double scale = std::pow(sup_norm(g), 1.0 / (p - 1.0));
        for (std::size_t i = 0; i < sol.field.size(); ++i)
            REQUIRE(std::abs(sol.field[i]) <= scale * tor.field[i] + 1e-8);
    }
}

TEST_CASE("non-flat forcing residual agrees with naive re-derivation", "[p_poisson]") {
    const auto ball = make_ball(0, 1, 2, 257);
    Field g(ball, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = 1.0 + 0.5 * std::sin(3 * ball->node(i));
    const auto sol = solve_p_poisson(ball, 3.0, g, cfg);
    REQUIRE(sol.converged);
    const double res = oracles::naive_residual_sup_1d(sol.field, g, 3.0, cfg.eps_reg);
    CHECK(res < 1e-6);
    CHECK(res == Approx(pde_residual_sup(ball, 3.0, sol.field, g, cfg.eps_reg)).margin(1e-12));
}

TEST_CASE("rectangle solver reproduces the classical series solution", "[p_poisson][2d]") {
    const auto rect = make_rectangle(0, 2, 0, 1, 65);
    const auto sol = torsion_function(rect, 2.0, cfg);
    REQUIRE(sol.converged);
    double err = 0;
    for (std::size_t j = 0; j < rect->ny(); ++j)
        for (std::size_t i = 0; i < rect->nx(); ++i)
            err = std::max(err, std::abs(sol.field[rect->flat_index(i, j)] -
                                         oracles::rectangle_torsion_p2(
                                             rect->node_x(i), rect->node_y(j), 2.0, 1.0)));
    CHECK(err < 1e-4);
}

TEST_CASE("rectangle solver keeps homogeneity and comparison", "[p_poisson][2d]") {
    const auto rect = make_rectangle(0, 1, 0, 1, 33);
    Field g1(rect, 0.5), g2(rect, 1.0);
    const auto s1 = solve_p_poisson(rect, 4.0, g1, cfg);
    const auto s2 = solve_p_poisson(rect, 4.0, g2, cfg);
    REQUIRE(s1.converged);
    REQUIRE(s2.converged);
    const double factor = std::pow(2.0, 1.0 / 3.0);
    for (std::size_t i = 0; i < s1.field.size(); ++i) {
        REQUIRE(s1.field[i] <= s2.field[i] + 1e-9);
        REQUIRE(std::abs(s2.field[i] - factor * s1.field[i]) <= 1e-9);
    }
}

TEST_CASE("solver input validation", "[p_poisson]") {
    const auto ball = make_ball(0, 1, 2, 65);
    Field one(ball, 1.0);
    CHECK_THROWS_AS(solve_p_poisson(ball, 1.0, one, cfg), config_error);
    SolverConfig bad = cfg;
    bad.eps_schedule = {1e-2, 1e-2};
    CHECK_THROWS_AS(solve_p_poisson(ball, 2.0, one, bad), config_error);
    bad = cfg;
    bad.p_continuation_step = 3.0;
    CHECK_THROWS_AS(solve_p_poisson(ball, 2.0, one, bad), config_error);
}
