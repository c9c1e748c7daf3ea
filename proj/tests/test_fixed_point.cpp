#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "plap/fixed_point.hpp"

using namespace plap;
using Catch::Approx;

namespace {

// Shared setup on a moderate disk mesh; c calibrated over the ps we use.
struct Setup {
    DomainPtr dom = make_ball(0, 1, 2, 513);
    FixedPointConfig cfg{};
    GradientEstimateConstants ge;
    Setup() { ge = {calibrate_c(dom, {2, 3, 5, 10}, 2.5, cfg.solver), 2.5}; }
};

const Setup& setup() {
    static Setup s;
    return s;
}

ProblemParams trivial_params(double p) {
    ProblemParams pp;
    pp.lambda = 1.0;
    pp.q = 1.0;
    pp.p = p;
    return pp;
}

}  // namespace

TEST_CASE("box construction", "[fixed_point]") {
    const auto& s = setup();
    const auto data = make_domain_data(s.dom, 3.0, 1.0, s.ge, s.cfg.solver);
    ProblemParams pp = trivial_params(3.0);

    const double phi_sup = data.constants.torsion_sup;

    SECTION("ceiling equals the torsion profile at its own level") {
        const auto box = build_box(pp, phi_sup, data, s.cfg);
        CHECK(sup_diff(box.super, data.torsion.field) < 1e-14);
        CHECK(box.grad_cap == Approx(data.constants.kp_upper).epsilon(1e-12));
    }

    SECTION("floor scales to zero with lambda") {
        pp.lambda = 1e-30;
        const auto box = build_box(pp, phi_sup, data, s.cfg);
        CHECK(sup_norm(box.sub) < 1e-10);
    }

    SECTION("floor stays below ceiling and both vanish on the boundary") {
        pp.lambda = 1.0;
        const double level = balance_level(pp, data.constants, KpEndpoint::upper);
        const auto box = build_box(pp, level, data, s.cfg);
        for (std::size_t i = 0; i < box.sub.size(); ++i)
            REQUIRE(box.sub[i] <= box.super[i] + 1e-9);
        CHECK(box.sub.dirichlet_zero());
        CHECK(box.super.dirichlet_zero());
    }

    SECTION("rejects parameters outside the region") {
        pp.lambda = 1e9;
        CHECK_THROWS_AS(build_box(pp, 0.01, data, s.cfg), config_error);
    }

    SECTION("gradient cap respects the bracket endpoints") {
        const double level = 0.5;
        const auto lo = build_box(pp, level, data, s.cfg, KpEndpoint::lower);
        const auto hi = build_box(pp, level, data, s.cfg, KpEndpoint::upper);
        CHECK(lo.grad_cap <= hi.grad_cap);
        CHECK(lo.grad_cap == Approx(data.constants.kp_lower * level / phi_sup).epsilon(1e-12));
    }
}

TEST_CASE("one map application on the frozen problem", "[fixed_point]") {
    const auto& s = setup();
    const auto data = make_domain_data(s.dom, 3.0, 1.0, s.ge, s.cfg.solver);

    SECTION("pure unit forcing reproduces the torsion profile for any input") {
        ProblemParams pp = trivial_params(3.0);
        const auto box = build_box(pp, data.constants.torsion_sup, data, s.cfg);
        const auto step = picard_step(pp, box.sub, box, data, s.cfg);
        CHECK(sup_diff(step.value, data.torsion.field) <= 1e-8);

        // and scaling the coefficient scales the image accordingly
        ProblemParams pk = pp;
        pk.lambda = 0.4;
        const double factor = std::pow(0.4, 1.0 / (pk.p - 1.0));
        const auto boxk = build_box(pk, data.constants.torsion_sup, data, s.cfg);
        const auto stepk = picard_step(pk, boxk.sub, boxk, data, s.cfg);
        double err = 0;
        for (std::size_t i = 0; i < stepk.value.size(); ++i)
            err = std::max(err,
                           std::abs(stepk.value[i] - factor * data.torsion.field[i]));
        CHECK(err <= 1e-8);
    }

    SECTION("the floor maps upward when the exponential term is on") {
        ProblemParams pp = trivial_params(3.0);
        pp.m = 0.05;
        pp.l = 1.0;
        pp.alpha = 0.5;
        pp.s = 1.0;
        const double level = balance_level(pp, data.constants, KpEndpoint::upper);
        REQUIRE(pp.m < exp_coeff_cap(pp, level, data.constants.A_p));
        const auto box = build_box(pp, level, data, s.cfg);
        const auto step = picard_step(pp, box.sub, box, data, s.cfg);
        for (std::size_t i = 0; i < step.value.size(); ++i)
            REQUIRE(step.value[i] >= box.sub[i] - 1e-9);
    }

    SECTION("inputs outside the box are rejected") {
        ProblemParams pp = trivial_params(3.0);
        const auto box = build_box(pp, data.constants.torsion_sup, data, s.cfg);
        Field above = box.super;
        for (auto& v : above.values) v *= 1.5;
        above.zero_boundary();
        CHECK_THROWS_AS(picard_step(pp, above, box, data, s.cfg), box_violation);
    }
}

TEST_CASE("trivial fixed point lands on the torsion profile", "[fixed_point]") {
    const auto& s = setup();
    const auto data = make_domain_data(s.dom, 3.0, 1.0, s.ge, s.cfg.solver);
    ProblemParams pp = trivial_params(3.0);
    const auto rep = solve_problem(pp, data.constants.torsion_sup, data, s.cfg);
    REQUIRE(rep.verdict == Verdict::converged);
    REQUIRE(rep.solution.has_value());
    CHECK(rep.outer_iterations <= 3);
    CHECK(sup_diff(*rep.solution, data.torsion.field) <= 1e-8);
    CHECK(rep.bounds_all_ok());
    CHECK(rep.energy_ok);
}

TEST_CASE("full solve with all three forcing terms", "[fixed_point]") {
    const auto& s = setup();
    ProblemParams pp;
    pp.lambda = 1.0;
    pp.beta = 1.0;
    pp.p = 10.0;
    pp.q = 2.0;
    pp.a = 2.0;
    pp.b = 1.0;
    pp.l = 2.0;
    pp.alpha = 1.0;
    pp.s = 1.0;
    const auto data = make_domain_data(s.dom, pp.p, pp.b, s.ge, s.cfg.solver);
    const double level = balance_level(pp, data.constants, KpEndpoint::upper);
    pp.m = 0.5 * exp_coeff_cap(pp, level, data.constants.A_p);

    const auto rep = solve_problem(pp, level, data, s.cfg);
    REQUIRE(rep.verdict == Verdict::converged);
    REQUIRE(rep.solution.has_value());
    REQUIRE(rep.sup_diffs.back() <= s.cfg.outer_tol_factor * level);
    CHECK(rep.bounds_lower_ok);
    CHECK(rep.bounds_upper_ok);
    CHECK(rep.bounds_grad_ok);
    CHECK(rep.energy_ok);
    CHECK(rep.energy_solution <= rep.energy_distance);
    CHECK(rep.fixed_point_residual <= 2.0 * s.cfg.outer_tol_factor * level);
    CHECK(rep.pde_residual <= 1e-6);

    SECTION("iteration trace is reproducible bit for bit") {
        const auto again = solve_problem(pp, level, data, s.cfg);
        REQUIRE(again.sup_diffs.size() == rep.sup_diffs.size());
        for (std::size_t i = 0; i < rep.sup_diffs.size(); ++i)
            REQUIRE(again.sup_diffs[i] == rep.sup_diffs[i]);
        REQUIRE(sup_diff(*again.solution, *rep.solution) == 0.0);
    }

    SECTION("residual agrees with the naive oracle") {
        const Field h = detail::frozen_forcing(pp, *rep.solution);
        const Field rhs = detail::reaction_plus(pp, *rep.solution, h);
        CHECK(oracles::naive_residual_sup_1d(*rep.solution, rhs, pp.p, s.cfg.solver.eps_reg) <=
              1e-6);
    }
}

TEST_CASE("full solve on a rectangle", "[fixed_point][2d]") {
    const auto rect = make_rectangle(0, 1, 0, 1, 33);
    FixedPointConfig cfg;
    const GradientEstimateConstants ge{calibrate_c(rect, {2, 4}, 2.5, cfg.solver), 2.5};
    const auto data = make_domain_data(rect, 4.0, 1.0, ge, cfg.solver);
    ProblemParams pp;
    pp.lambda = 1.0;
    pp.beta = 0.5;
    pp.p = 4.0;
    pp.q = 2.0;
    pp.a = 1.5;
    pp.b = 1.0;
    pp.l = 2.0;
    pp.alpha = 0.5;
    pp.s = 1.0;
    const double level = balance_level(pp, data.constants, KpEndpoint::upper);
    pp.m = 0.5 * exp_coeff_cap(pp, level, data.constants.A_p);
    const auto rep = solve_problem(pp, level, data, cfg);
    REQUIRE(rep.verdict == Verdict::converged);
    CHECK(rep.bounds_all_ok());
    CHECK(rep.energy_ok);
    CHECK(rep.pde_residual <= 1e-6);
}

TEST_CASE("growth probe verdicts", "[fixed_point][probe]") {
    const auto dom = make_ball(0, 1, 2, 257);
    FixedPointConfig cfg;
    ProblemParams pp;
    pp.lambda = 0.0;
    pp.p = 2.0;
    pp.q = 1.0;
    pp.l = 1.0;
    pp.alpha = 1.0;
    pp.s = 1.0;

    SECTION("coefficient above the threshold grows without bound") {
        pp.m = 3.0;
        const auto rep = nonexistence_probe(dom, pp, cfg);
        CHECK(rep.verdict == ProbeVerdict::unbounded_growth);
    }
    SECTION("small coefficient stabilizes") {
        pp.m = 0.1;
        const auto rep = nonexistence_probe(dom, pp, cfg);
        CHECK(rep.verdict == ProbeVerdict::stabilized);
        CHECK(rep.last_sup < 0.1);
    }
    SECTION("no exponential forcing stabilizes trivially") {
        pp.m = 0.0;
        pp.lambda = 0.5;
        const auto rep = nonexistence_probe(dom, pp, cfg);
        CHECK(rep.verdict == ProbeVerdict::stabilized);
    }
    SECTION("misuse outside the slow-growth range is rejected") {
        pp.l = 3.0;  // l >= p
        CHECK_THROWS_AS(nonexistence_probe(dom, pp, cfg), config_error);
        pp.l = 1.0;
        pp.beta = 1.0;
        CHECK_THROWS_AS(nonexistence_probe(dom, pp, cfg), config_error);
    }
}
