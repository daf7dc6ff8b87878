#pragma once

#include <span>
#include <vector>

#include "gcflow/core.hpp"

/// Gradient-constrained transport via exponential penalization of the
/// constraint inside a small nonlinear diffusion:
///
///   u_t - delta (k_eps(u_x^2 - g^2) u_x)_x + b u_x + c u = f,   u = 0 on the boundary.
///
/// Discretized with implicit Euler in time, first-order upwinding for b u_x
/// and a conservative three-point stencil for the diffusion. The per-step
/// nonlinear system is solved by relinearizing the cell fluxes around the
/// current iterate (tridiagonal Jacobian) with a trust limit on how far the
/// exponent may grow per iteration.
namespace gcflow::penalty {

/// Exponent arguments above this are clamped and counted as overflow events.
inline constexpr double kMaxExponent = 700.0;

/// Largest increase of s/eps allowed in a single nonlinear iteration.
inline constexpr double kTrustExponentIncrease = 2.0;

inline constexpr double kDivergenceBound = 1e6;

struct KEps {
    double value;
    bool capped;
};

/// k_eps(s) = 1 for s <= 0 and exp(s / eps) for s > 0, with the exponent capped.
KEps k_eps_checked(double s, double epsilon);

inline double k_eps(double s, double epsilon) { return k_eps_checked(s, epsilon).value; }

struct PenaltyState {
    ScalarField current;
    double t = 0.0;
    int picard_iterations_last = 0;
    /// Running sum of k_eps(|Du|^2 - g^2) h dt over all cells and steps.
    double penalty_mass_accumulated = 0.0;
};

PenaltyState initial_state(const ProblemData& data);

/// One implicit step to state.t + params.dt. Coefficients are sampled at the new time.
PenaltyState step(const PenaltyState& state, const ProblemData& data, const SolverParams& params,
                  StepDiagnostics* diagnostics = nullptr);

/// Same as step, but lands exactly on t_next (used by solve to avoid drift).
PenaltyState advance_to(const PenaltyState& state, double t_next, const ProblemData& data, const SolverParams& params,
                        StepDiagnostics* diagnostics = nullptr);

/// Runs from t = 0 to t_end and records u0 plus the requested snapshots.
Trajectory solve(const ProblemData& data, const SolverParams& params, std::span<const double> snapshot_times);

/// max over cells of (|Du|_i - g_i)^+ with g sampled at cell midpoints.
double constraint_violation(const ScalarField& field, std::span<const double> g_at_midpoints);

}  // namespace gcflow::penalty
