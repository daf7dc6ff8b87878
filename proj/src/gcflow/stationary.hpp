#pragma once

#include "gcflow/core.hpp"

namespace gcflow {

struct StationaryResult {
    ScalarField solution;
    double pseudo_time_used = 0.0;
    /// max |u^{n+1} - u^n| / dt at termination.
    double steady_residual = 0.0;
    long steps = 0;
};

inline constexpr double kDefaultSteadyTol = 1e-6;

/// 50 / lambda, the default pseudo-time budget for coercivity constant lambda.
double default_pseudo_time_budget(double lambda);

/// Steady state of the penalized evolution for time-independent data, reached
/// by marching the gradient-penalty step from data.u0() in pseudo-time until
/// the update rate drops below steady_tol. params.t_end is ignored; params.dt
/// is the largest pseudo-time step and is halved for steps whose nonlinear
/// iteration fails.
///
/// Throws ErrorCode::InvalidArgument if the callbacks vary in time and
/// ErrorCode::NoSteadyState if t_max is reached first.
StationaryResult solve_stationary(const ProblemData& data, const SolverParams& params,
                                  double steady_tol = kDefaultSteadyTol, double t_max = -1.0);

}  // namespace gcflow
