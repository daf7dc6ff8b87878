#include "gcflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "gcflow/obstacle_solver.hpp"
#include "gcflow/penalty_solver.hpp"

namespace gcflow::diagnostics {

std::vector<SnapshotError> error_vs_oracle(const Trajectory& traj,
                                           const std::function<double(double, double)>& oracle)
{
    std::vector<SnapshotError> errors;
    errors.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const ScalarField& u = traj.snapshots[k];
        const double t = traj.times[k];
        const ScalarField exact = ScalarField::sample(u.grid(), [&](double x) { return oracle(x, t); });
        const ScalarField diff = u - exact;
        errors.push_back({max_norm(diff), l2_norm(diff)});
    }
    return errors;
}

FreeBoundaries extract_free_boundaries(const ScalarField& field, const ScalarField& obstacle, double tol)
{
    const std::vector<Label> labels = obstacle::coincidence_partition(field, obstacle, tol);
    const Grid1D& grid = field.grid();
    const std::size_t n = field.size();

    std::size_t first = n;
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (obstacle[i] > tol) {
            first = std::min(first, i);
            last = i;
        }
    }
    FreeBoundaries fb;
    if (first == n) return fb;

    auto interface = [&](std::size_t right) { return 0.5 * (grid.node(right - 1) + grid.node(right)); };

    std::size_t j = first;
    if (labels[j] == Label::Upper) {
        while (j <= last && labels[j] == Label::Upper) ++j;
        if (j > last) return fb;
        if (labels[j] == Label::Open) fb.zeta = interface(j);
    }
    while (j <= last && labels[j] != Label::Open) ++j;
    if (j > last) return fb;
    while (j <= last && labels[j] == Label::Open) ++j;
    fb.xi = j > last ? grid.x_right() : interface(j);
    return fb;
}

FreeBoundaryTrace trace_free_boundaries(const Trajectory& traj, const ScalarField& obstacle, double tol)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    FreeBoundaryTrace trace;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const FreeBoundaries fb = extract_free_boundaries(traj.snapshots[k], obstacle, tol);
        trace.times.push_back(traj.times[k]);
        trace.xi_numeric.push_back(fb.xi.value_or(nan));
        trace.zeta_numeric.push_back(fb.zeta.value_or(nan));
    }
    return trace;
}

StabilizationReport detect_stabilization(const Trajectory& traj, const ScalarField& target, double tol)
{
    require(traj.size() >= 2, "detect_stabilization: need at least two snapshots");
    require(tol > 0.0, "detect_stabilization: tol must be > 0");

    StabilizationReport report;
    report.t_star_numeric = std::numeric_limits<double>::infinity();
    report.target_error_at_end = max_norm(traj.snapshots.back() - target);

    for (std::size_t k = traj.size(); k-- > 0;) {
        if (max_norm(traj.snapshots[k] - target) > tol) break;
        report.t_star_numeric = traj.times[k];
    }
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const ScalarField& a = traj.snapshots[k];
        const ScalarField& b = traj.snapshots[k + 1];
        for (std::size_t i = 0; i < a.size(); ++i)
            report.monotone_violation_max = std::max(report.monotone_violation_max, a[i] - b[i]);
    }
    return report;
}

ScalarField rescale_into_constraint(const ScalarField& v, double g1_max_diff, double m)
{
    require(m > 0.0, "rescale_into_constraint: m must be > 0");
    require(g1_max_diff >= 0.0, "rescale_into_constraint: alpha must be >= 0");
    const double psi = 1.0 + g1_max_diff / m;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] / psi;
    return ScalarField(v.grid(), std::move(out));
}

double data_distance(const ProblemData& a, const ProblemData& b, const SolverParams& params)
{
    require(a.grid() == b.grid(), "data_distance: grids differ");
    const Grid1D& grid = a.grid();
    const std::size_t n = grid.node_count();
    const double h = grid.h();
    const long steps = step_count(params);

    const double u0_gap = l2_norm(a.u0() - b.u0());
    double l1 = 0.0;
    double g_sup = 0.0;
    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * params.dt;
        const double wt = (k == 0 || k == steps) ? 0.5 : 1.0;
        double row = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.node(i);
            const double wx = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
            row += wx * (std::abs(a.b(x, t) - b.b(x, t)) + std::abs(a.c(x, t) - b.c(x, t)) +
                         std::abs(a.f(x, t) - b.f(x, t)));
            g_sup = std::max(g_sup, std::abs(a.g(x, t) - b.g(x, t)));
            if (i + 1 < n) g_sup = std::max(g_sup, std::abs(a.g(grid.midpoint(i), t) - b.g(grid.midpoint(i), t)));
        }
        l1 += wt * row * h * params.dt;
    }
    return u0_gap * u0_gap + l1 + g_sup;
}

StabilityResult stability_study(const ProblemData& base, const ProblemData& perturbed, const SolverParams& params)
{
    require(base.grid() == perturbed.grid(), "stability_study: grids differ");
    params.validate();
    const long steps = step_count(params);
    std::vector<double> every_step(static_cast<std::size_t>(steps));
    for (long k = 1; k <= steps; ++k) every_step[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * params.dt;

    auto run = [&](const ProblemData& data) { return penalty::solve(data, params, every_step); };
    auto first = std::async(std::launch::async, run, std::cref(base));
    const Trajectory second = run(perturbed);
    const Trajectory one = first.get();

    StabilityResult result;
    for (std::size_t k = 0; k < one.size(); ++k) {
        const double gap = l2_norm(one.snapshots[k] - second.snapshots[k]);
        result.sup_l2_sq_diff = std::max(result.sup_l2_sq_diff, gap * gap);
    }
    result.data_distance = data_distance(base, perturbed, params);
    return result;
}

std::vector<double> asymptotic_study(const ProblemData& data, const SolverParams& params, const ScalarField& u_inf,
                                     std::span<const double> sample_times)
{
    require(u_inf.grid() == data.grid(), "asymptotic_study: grids differ");
    const Trajectory traj = penalty::solve(data, params, sample_times);
    std::vector<double> distances;
    distances.reserve(sample_times.size());
    for (double tau : sample_times) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < traj.size(); ++k)
            if (std::abs(traj.times[k] - tau) < std::abs(traj.times[best] - tau)) best = k;
        distances.push_back(l2_norm(traj.snapshots[best] - u_inf));
    }
    return distances;
}

}  // namespace gcflow::diagnostics
