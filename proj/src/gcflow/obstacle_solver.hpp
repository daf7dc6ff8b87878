#pragma once

#include <span>
#include <vector>

#include "gcflow/core.hpp"

/// Two-obstacle formulation -d <= z <= d of the constrained transport problem
/// for constant b, c = 0, g = 1 and a source depending on t only. The band is
/// enforced by the penalty (delta/eps) (z - clamp(z, -d, d)); each step splits
/// into an implicit transport-diffusion solve and an exact pointwise penalty solve.
namespace gcflow::obstacle {

double clamp_to_obstacles(double v, double d);

/// v - clamp_to_obstacles(v, d): zero inside the band, signed excess outside.
double penalty_residual(double v, double d);

/// Solves z + lambda * penalty_residual(z, d) = z_star for z (lambda >= 0).
double solve_pointwise_penalty(double z_star, double d, double lambda);

struct ObstacleState {
    ScalarField current;
    double t = 0.0;
    ScalarField obstacle;
};

/// d(x) = min(x - x_left, x_right - x) at the grid nodes.
ScalarField distance_obstacle(const Grid1D& grid);

/// Throws ErrorCode::InvalidArgument unless b is a constant, c = 0, g = 1 and
/// f = f(t) at every node for the sampled times.
void check_restriction(const ProblemData& data, std::span<const double> times);

ObstacleState initial_state(const ProblemData& data);

ObstacleState step(const ObstacleState& state, const ProblemData& data, const SolverParams& params,
                   StepDiagnostics* diagnostics = nullptr);

ObstacleState advance_to(const ObstacleState& state, double t_next, const ProblemData& data,
                         const SolverParams& params, StepDiagnostics* diagnostics = nullptr);

Trajectory solve(const ProblemData& data, const SolverParams& params, std::span<const double> snapshot_times);

/// Upper where z >= d - tol (checked first), Lower where z <= -d + tol, Open otherwise.
std::vector<Label> coincidence_partition(const ScalarField& field, const ScalarField& obstacle, double tol);

}  // namespace gcflow::obstacle
