#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gcflow/core.hpp"

namespace gcflow::diagnostics {

struct SnapshotError {
    double linf = 0.0;
    double l2 = 0.0;
};

/// Max-norm and L2 distance of every snapshot to oracle(x, t) sampled at the nodes.
std::vector<SnapshotError> error_vs_oracle(const Trajectory& traj,
                                           const std::function<double(double x, double t)>& oracle);

struct FreeBoundaries {
    std::optional<double> xi;
    std::optional<double> zeta;
};

/// Reads the free boundaries off the coincidence labels of `field` against
/// the band [-obstacle, obstacle]. Nodes with obstacle <= tol (the boundary
/// layer, where every value is within tol of both obstacles) are skipped.
///
///   zeta: end of a leading Upper run, when an Open node follows it.
///   xi:   end of the first Open run; x_right when that run reaches the last
///         examined node.
///
/// Interfaces sit at the midpoint between the two nodes whose labels differ.
FreeBoundaries extract_free_boundaries(const ScalarField& field, const ScalarField& obstacle, double tol);

struct FreeBoundaryTrace {
    std::vector<double> times;
    std::vector<double> xi_numeric;    // NaN when absent
    std::vector<double> zeta_numeric;  // NaN when absent
};

FreeBoundaryTrace trace_free_boundaries(const Trajectory& traj, const ScalarField& obstacle, double tol);

struct StabilizationReport {
    /// Earliest snapshot time from which every later snapshot stays within
    /// tol of the target; +infinity if the last one does not.
    double t_star_numeric = 0.0;
    double target_error_at_end = 0.0;
    /// Largest node-wise decrease between consecutive snapshots.
    double monotone_violation_max = 0.0;
};

StabilizationReport detect_stabilization(const Trajectory& traj, const ScalarField& target, double tol);

/// v / (1 + alpha / m). If |Dv| <= g1 and g2 >= m with |g1 - g2| <= alpha,
/// the result satisfies |D result| <= g2.
ScalarField rescale_into_constraint(const ScalarField& v, double g1_max_diff, double m);

struct StabilityResult {
    double sup_l2_sq_diff = 0.0;
    double data_distance = 0.0;
};

/// Squared L2 distance of the initial states plus L1(space-time) distances of
/// b, c, f plus the sup distance of g, all on the grid and time steps of params.
double data_distance(const ProblemData& a, const ProblemData& b, const SolverParams& params);

/// Runs both problems with the gradient-penalty solver (concurrently) and
/// compares the largest squared L2 gap over all steps with data_distance.
StabilityResult stability_study(const ProblemData& base, const ProblemData& perturbed, const SolverParams& params);

/// L2 distance between the evolving solution and u_inf at each sample time.
std::vector<double> asymptotic_study(const ProblemData& data, const SolverParams& params, const ScalarField& u_inf,
                                     std::span<const double> sample_times);

}  // namespace gcflow::diagnostics
