#pragma once

#include <sstream>
#include <span>

#include "gcflow/core.hpp"

namespace gcflow::detail {

// Drives `advance(state, t_next, diag)` over k * dt for k = 1..step_count and
// records the snapshots picked by snapshot_steps.
template <class State, class Advance>
Trajectory march(const ProblemData& data, const SolverParams& params, std::span<const double> snapshot_times,
                 State state, Advance&& advance)
{
    const std::vector<long> steps = snapshot_steps(snapshot_times, params);
    const long n_steps = step_count(params);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.snapshots.push_back(data.u0());
    traj.diagnostics.reserve(static_cast<std::size_t>(n_steps));

    std::size_t next_snapshot = 1;
    for (long k = 1; k <= n_steps; ++k) {
        const double t_next = static_cast<double>(k) * params.dt;
        StepDiagnostics diag;
        try {
            state = advance(state, t_next, diag);
        } catch (const Error& e) {
            std::ostringstream os;
            os << e.what() << " (step to t = " << t_next << ")";
            throw Error(e.code(), os.str());
        }
        traj.diagnostics.push_back(diag);
        if (next_snapshot < steps.size() && steps[next_snapshot] == k) {
            traj.times.push_back(t_next);
            traj.snapshots.push_back(state.current);
            ++next_snapshot;
        }
    }
    return traj;
}

}  // namespace gcflow::detail
