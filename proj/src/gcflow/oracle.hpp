#pragma once

#include "gcflow/core.hpp"

/// Closed-form transported sandpile on (0, 1): b = 1, c = 0, g = 1, f(x, t) = t,
/// started from the parabola/line profile z0. The pile reaches the distance
/// function d(x) = 1/2 - |x - 1/2| at t = 5/4 and stays there.
namespace gcflow::sandpile {

inline constexpr double kStabilizationTime = 1.25;

/// sqrt(3) - 1, where z0 switches from the parabola to the line.
double initial_kink();

/// First free boundary, defined on [0, 5/4].
double xi(double t);

/// Second free boundary 2(t - 1), defined on [1, 5/4].
double zeta(double t);

double distance(double x);

double initial_profile(double x);

/// Exact profile z(x, t) for x in [0, 1], t >= 0.
double profile(double x, double t);

/// Which constraint the exact profile touches at an interior point.
Label coincidence_label(double x, double t);

/// Sandpile data on a uniform grid of (0, 1): u0 = z0 sampled at the nodes,
/// m = 1, l = 0. `f_shift` adds a constant to the source (used by stability ladders).
ProblemData make_problem(int n_cells, double f_shift = 0.0);

/// d sampled at the nodes of `grid` (grid must be (0, 1)).
ScalarField distance_field(const Grid1D& grid);

ScalarField profile_field(const Grid1D& grid, double t);

}  // namespace gcflow::sandpile
