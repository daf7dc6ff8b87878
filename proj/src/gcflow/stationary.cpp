#include "gcflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "gcflow/penalty_solver.hpp"

namespace gcflow {
namespace {

constexpr double kMaxStepReduction = 1024.0;
constexpr int kGrowAfter = 8;

void check_time_independent(const ProblemData& data, double t_max)
{
    const Grid1D& grid = data.grid();
    const double probes[] = {0.5 * t_max, t_max, 1.0};
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const double x = grid.node(i);
        for (double t : probes) {
            const bool same = data.b(x, t) == data.b(x, 0.0) && data.c(x, t) == data.c(x, 0.0) &&
                              data.f(x, t) == data.f(x, 0.0) && data.g(x, t) == data.g(x, 0.0);
            if (!same) {
                std::ostringstream os;
                os << "solve_stationary: data varies in time at x = " << x;
                fail(ErrorCode::InvalidArgument, os.str());
            }
        }
    }
}

}  // namespace

double default_pseudo_time_budget(double lambda)
{
    require(lambda > 0.0, "pseudo-time budget needs lambda > 0");
    return 50.0 / lambda;
}

StationaryResult solve_stationary(const ProblemData& data, const SolverParams& params, double steady_tol, double t_max)
{
    require(steady_tol > 0.0, "solve_stationary: steady_tol must be > 0");
    if (t_max <= 0.0) t_max = default_pseudo_time_budget(data.l() > 0.0 ? data.l() : 1.0);
    check_time_independent(data, t_max);

    SolverParams marching = params;
    marching.t_end = t_max;
    marching.validate();

    // The steady state does not depend on the pseudo-time step, so a step whose
    // nonlinear iteration fails is retried at half the size. The step grows
    // back toward params.dt after a run of successes.
    penalty::PenaltyState state = penalty::initial_state(data);
    double dt = marching.dt;
    const double dt_min = marching.dt / kMaxStepReduction;
    int successes = 0;
    double rate = 0.0;
    long steps = 0;
    while (state.t < t_max) {
        const double t_next = std::min(state.t + dt, t_max);
        StepDiagnostics diag;
        std::optional<penalty::PenaltyState> next;
        try {
            next = penalty::advance_to(state, t_next, data, marching, &diag);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::PicardDivergence && e.code() != ErrorCode::LinearSolveFailure) throw;
        }
        if (!next || !diag.converged) {
            dt *= 0.5;
            successes = 0;
            if (dt < dt_min) fail(ErrorCode::NoSteadyState, "solve_stationary: pseudo-time step underflow");
            continue;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < next->current.size(); ++i)
            change = std::max(change, std::abs(next->current[i] - state.current[i]));
        rate = change / (t_next - state.t);
        state = std::move(*next);
        ++steps;
        if (rate <= steady_tol) return StationaryResult{std::move(state.current), state.t, rate, steps};
        if (++successes >= kGrowAfter && dt < marching.dt) {
            dt = std::min(2.0 * dt, marching.dt);
            successes = 0;
        }
    }
    std::ostringstream os;
    os << "solve_stationary: update rate " << rate << " still above " << steady_tol << " at pseudo-time " << t_max;
    fail(ErrorCode::NoSteadyState, os.str());
}

}  // namespace gcflow
