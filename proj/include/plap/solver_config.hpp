#pragma once

#include <vector>

#include "plap/errors.hpp"

namespace plap {

/// Knobs for the regularized Newton solver. The degenerate gradient
/// coefficient is floored at eps_reg and reached by walking eps_schedule;
/// targets far from p = 2 are reached by continuation in p.
struct SolverConfig {
    double eps_reg = 1e-10;
    std::vector<double> eps_schedule = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
    // Stopping metric on the unit-scale problem: strong residual at newton_tol,
    // or a full Newton step with increment below newton_tol while the strong
    // residual sits under strong_residual_cap (its roundoff floor grows like
    // eps/h, so it cannot always reach newton_tol at fine meshes).
    double newton_tol = 1e-10;
    double strong_residual_cap = 1e-6;
    int max_newton_iters = 80;  // per (p, eps) stage
    double p_continuation_step = 2.0;

    void validate() const {
        if (!(eps_reg > 0)) throw config_error("SolverConfig: eps_reg must be positive");
        if (!(newton_tol > 0)) throw config_error("SolverConfig: newton_tol must be positive");
        if (!(strong_residual_cap >= newton_tol))
            throw config_error("SolverConfig: strong_residual_cap below newton_tol");
        if (max_newton_iters < 1) throw config_error("SolverConfig: max_newton_iters < 1");
        if (!(p_continuation_step > 0) || p_continuation_step > 2.0)
            throw config_error("SolverConfig: p_continuation_step must lie in (0, 2]");
        if (eps_schedule.empty()) throw config_error("SolverConfig: empty eps_schedule");
        for (std::size_t i = 1; i < eps_schedule.size(); ++i)
            if (!(eps_schedule[i] < eps_schedule[i - 1]))
                throw config_error("SolverConfig: eps_schedule must be strictly decreasing");
        if (eps_schedule.back() != eps_reg)
            throw config_error("SolverConfig: eps_schedule must end at eps_reg");
    }
};

}  // namespace plap
