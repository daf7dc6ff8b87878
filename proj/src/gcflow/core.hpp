#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gcflow/error.hpp"

namespace gcflow {

/// Uniform mesh of [x_left, x_right] with n_cells cells and n_cells + 1 nodes.
class Grid1D {
public:
    Grid1D(double x_left, double x_right, int n_cells);

    double x_left() const noexcept { return x_left_; }
    double x_right() const noexcept { return x_right_; }
    int n_cells() const noexcept { return n_cells_; }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>(n_cells_) + 1; }
    double h() const noexcept { return h_; }
    double length() const noexcept { return x_right_ - x_left_; }

    double node(std::size_t i) const noexcept
    {
        return i == static_cast<std::size_t>(n_cells_) ? x_right_ : x_left_ + static_cast<double>(i) * h_;
    }
    double midpoint(std::size_t cell) const noexcept { return x_left_ + (static_cast<double>(cell) + 0.5) * h_; }
    std::vector<double> nodes() const;

    /// Distance to the nearer endpoint, min(x - x_left, x_right - x).
    double boundary_distance(double x) const noexcept;

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    double x_left_;
    double x_right_;
    int n_cells_;
    double h_;
};

/// Nodal values of a function on a Grid1D.
class ScalarField {
public:
    ScalarField(Grid1D grid, std::vector<double> values);

    static ScalarField zeros(const Grid1D& grid);
    static ScalarField sample(const Grid1D& grid, const std::function<double(double)>& fn);

    const Grid1D& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    /// values[0] and values[n_cells] both within tol of zero.
    bool has_zero_trace(double tol = 0.0) const noexcept;

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    Grid1D grid_;
    std::vector<double> values_;
};

ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double alpha, const ScalarField& v);

/// Forward differences (values[i+1] - values[i]) / h, one per cell.
std::vector<double> forward_diff(const ScalarField& field);

/// max_i |forward_diff(field)_i|.
double max_gradient(const ScalarField& field);

/// Trapezoidal discrete L2 norm.
double l2_norm(const ScalarField& field);

double max_norm(const ScalarField& field);

/// Position of a value relative to the band -d <= v <= d.
enum class Label { Lower, Open, Upper };

using SpaceTimeFn = std::function<double(double x, double t)>;

/// Data (b, c, f, g, u0) of the constrained transport problem together with
/// the lower bound m of g and the weak coercivity constant l of c - b'/2.
///
/// Construction samples the callbacks on the grid nodes and cell midpoints at
/// 32 times in [0, check_horizon] and throws ErrorCode::InvalidData if
///   - g < m or m <= 0,
///   - u0 does not vanish at the end nodes,
///   - some cell slope of u0 exceeds the largest g(., 0) on that cell,
///   - c - b'/2 < l anywhere (b' by finite differences).
class ProblemData {
public:
    ProblemData(SpaceTimeFn b, SpaceTimeFn c, SpaceTimeFn f, SpaceTimeFn g, ScalarField u0, double m, double l,
                double check_horizon = 1.0);

    double b(double x, double t) const { return b_(x, t); }
    double c(double x, double t) const { return c_(x, t); }
    double f(double x, double t) const { return f_(x, t); }
    double g(double x, double t) const { return g_(x, t); }

    const SpaceTimeFn& b_fn() const noexcept { return b_; }
    const SpaceTimeFn& c_fn() const noexcept { return c_; }
    const SpaceTimeFn& f_fn() const noexcept { return f_; }
    const SpaceTimeFn& g_fn() const noexcept { return g_; }

    const ScalarField& u0() const noexcept { return u0_; }
    const Grid1D& grid() const noexcept { return u0_.grid(); }
    double m() const noexcept { return m_; }
    double l() const noexcept { return l_; }

    /// g(., t) at the cell midpoints.
    std::vector<double> g_at_midpoints(double t) const;

    /// Copy with u0 replaced (revalidated).
    ProblemData with_initial_state(ScalarField u0) const;

    static constexpr int kTimeSamples = 32;
    static constexpr double kFeasibilityTol = 1e-12;

private:
    void validate() const;

    SpaceTimeFn b_, c_, f_, g_;
    ScalarField u0_;
    double m_;
    double l_;
    double check_horizon_;
};

struct SolverParams {
    double epsilon = 1e-4;
    double delta = 1e-3;
    double dt = 5e-4;
    double t_end = 2.0;
    /// Max-norm update size at which the per-step nonlinear iteration stops.
    double picard_tol = 1e-10;
    int picard_max = 200;
    double constraint_tol = 1e-12;

    /// Throws ErrorCode::InvalidArgument on violation.
    void validate() const;

    /// epsilon = h^2, delta = h, dt = h/2.
    static SolverParams coupled(double h, double t_end);
};

struct StepDiagnostics {
    double t = 0.0;
    double constraint_violation = 0.0;
    int picard_iterations = 0;
    double penalty_mass = 0.0;  // contribution of this step
    int overflow_events = 0;
    bool converged = true;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ScalarField> snapshots;
    std::vector<StepDiagnostics> diagnostics;

    std::size_t size() const noexcept { return times.size(); }
};

/// Step index and snapshot bookkeeping shared by the evolution solvers:
/// requested times are rounded to the nearest step (ties to the earlier one),
/// duplicates dropped, and step 0 is always included.
std::vector<long> snapshot_steps(std::span<const double> snapshot_times, const SolverParams& params);

long step_count(const SolverParams& params);

}  // namespace gcflow
