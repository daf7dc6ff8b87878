#include "gcflow/obstacle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gcflow/penalty_solver.hpp"
#include "gcflow/time_march.hpp"
#include "gcflow/tridiagonal.hpp"

namespace gcflow::obstacle {

double clamp_to_obstacles(double v, double d) { return std::min(std::max(v, -d), d); }

double penalty_residual(double v, double d) { return v - clamp_to_obstacles(v, d); }

double solve_pointwise_penalty(double z_star, double d, double lambda)
{
    if (z_star > d) return (z_star + lambda * d) / (1.0 + lambda);
    if (z_star < -d) return (z_star - lambda * d) / (1.0 + lambda);
    return z_star;
}

ScalarField distance_obstacle(const Grid1D& grid)
{
    auto d = ScalarField::sample(grid, [&grid](double x) { return std::max(grid.boundary_distance(x), 0.0); });
    d[0] = 0.0;
    d[d.size() - 1] = 0.0;
    return d;
}

void check_restriction(const ProblemData& data, std::span<const double> times)
{
    const Grid1D& grid = data.grid();
    const double b0 = data.b(grid.x_left(), 0.0);
    constexpr double tol = 1e-12;
    for (double t : times) {
        const double f0 = data.f(grid.x_left(), t);
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            const double x = grid.node(i);
            bool ok = std::abs(data.b(x, t) - b0) <= tol && std::abs(data.c(x, t)) <= tol &&
                      std::abs(data.g(x, t) - 1.0) <= tol && std::abs(data.f(x, t) - f0) <= tol;
            if (!ok) {
                std::ostringstream os;
                os << "obstacle formulation needs constant b, c = 0, g = 1 and f = f(t); violated at (" << x << ", "
                   << t << ")";
                fail(ErrorCode::InvalidArgument, os.str());
            }
        }
    }
}

ObstacleState initial_state(const ProblemData& data)
{
    return ObstacleState{data.u0(), 0.0, distance_obstacle(data.grid())};
}

ObstacleState step(const ObstacleState& state, const ProblemData& data, const SolverParams& params,
                   StepDiagnostics* diagnostics)
{
    return advance_to(state, state.t + params.dt, data, params, diagnostics);
}

ObstacleState advance_to(const ObstacleState& state, double t_next, const ProblemData& data,
                         const SolverParams& params, StepDiagnostics* diagnostics)
{
    params.validate();
    require(state.current.grid() == data.grid() && state.obstacle.grid() == data.grid(),
            "obstacle::step: state and data grids differ");
    require(t_next <= params.t_end + 0.5 * params.dt, "obstacle::step: stepping past t_end");
    const double dt = t_next - state.t;
    require(dt > 0.0, "obstacle::step: time must advance");
    const double tt[] = {t_next};
    check_restriction(data, tt);

    const Grid1D& grid = data.grid();
    const double h = grid.h();
    const std::size_t n = grid.node_count();
    const std::size_t m = n - 2;
    const double b = data.b(grid.x_left(), t_next);
    const double f = data.f(grid.x_left(), t_next);
    const double diff = params.delta / (h * h);

    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
        diag[k] = 1.0 / dt + 2.0 * diff + std::abs(b) / h;
        lower[k] = -diff - (b >= 0.0 ? b / h : 0.0);
        upper[k] = -diff + (b < 0.0 ? b / h : 0.0);
        rhs[k] = state.current[k + 1] / dt + f;
    }
    solve_tridiagonal(lower, diag, upper, rhs);

    const double lambda = params.delta * dt / params.epsilon;
    std::vector<double> z(n, 0.0);
    double mass = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double d = state.obstacle[k + 1];
        z[k + 1] = solve_pointwise_penalty(rhs[k], d, lambda);
        mass += std::abs(penalty_residual(z[k + 1], d)) * h * dt * params.delta / params.epsilon;
    }

    ObstacleState next{ScalarField(grid, std::move(z)), t_next, state.obstacle};
    if (diagnostics) {
        diagnostics->t = t_next;
        diagnostics->constraint_violation = penalty::constraint_violation(next.current, data.g_at_midpoints(t_next));
        diagnostics->picard_iterations = 1;
        diagnostics->penalty_mass = mass;
        diagnostics->overflow_events = 0;
        diagnostics->converged = true;
    }
    return next;
}

Trajectory solve(const ProblemData& data, const SolverParams& params, std::span<const double> snapshot_times)
{
    params.validate();
    const double t0[] = {0.0};
    check_restriction(data, t0);
    return detail::march(data, params, snapshot_times, initial_state(data),
                         [&](const ObstacleState& state, double t_next, StepDiagnostics& diag) {
                             return advance_to(state, t_next, data, params, &diag);
                         });
}

std::vector<Label> coincidence_partition(const ScalarField& field, const ScalarField& obstacle, double tol)
{
    require(tol > 0.0, "coincidence_partition: tol must be > 0");
    require(field.grid() == obstacle.grid(), "coincidence_partition: grids differ");
    std::vector<Label> labels(field.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double z = field[i];
        const double d = obstacle[i];
        if (z >= d - tol)
            labels[i] = Label::Upper;
        else if (z <= -d + tol)
            labels[i] = Label::Lower;
        else
            labels[i] = Label::Open;
    }
    return labels;
}

}  // namespace gcflow::obstacle
