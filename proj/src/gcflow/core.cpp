#include "gcflow/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gcflow {

Grid1D::Grid1D(double x_left, double x_right, int n_cells)
    : x_left_(x_left), x_right_(x_right), n_cells_(n_cells), h_((x_right - x_left) / n_cells)
{
    require(std::isfinite(x_left) && std::isfinite(x_right) && x_right > x_left,
            "Grid1D: need finite x_left < x_right");
    require(n_cells >= 4, "Grid1D: need n_cells >= 4");
}

std::vector<double> Grid1D::nodes() const
{
    std::vector<double> xs(node_count());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = node(i);
    return xs;
}

double Grid1D::boundary_distance(double x) const noexcept
{
    return std::min(x - x_left_, x_right_ - x);
}

ScalarField::ScalarField(Grid1D grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    require(values_.size() == grid_.node_count(), "ScalarField: value count must equal n_cells + 1");
}

ScalarField ScalarField::zeros(const Grid1D& grid) { return ScalarField(grid, std::vector<double>(grid.node_count())); }

ScalarField ScalarField::sample(const Grid1D& grid, const std::function<double(double)>& fn)
{
    std::vector<double> v(grid.node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
    return ScalarField(grid, std::move(v));
}

bool ScalarField::has_zero_trace(double tol) const noexcept
{
    return std::abs(values_.front()) <= tol && std::abs(values_.back()) <= tol;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b)
{
    require(a.grid() == b.grid(), "ScalarField difference: grids differ");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
    return ScalarField(a.grid(), std::move(v));
}

ScalarField operator*(double alpha, const ScalarField& f)
{
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = alpha * f[i];
    return ScalarField(f.grid(), std::move(v));
}

std::vector<double> forward_diff(const ScalarField& field)
{
    const auto u = field.values();
    const double h = field.grid().h();
    std::vector<double> d(u.size() - 1);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (u[i + 1] - u[i]) / h;
    return d;
}

double max_gradient(const ScalarField& field)
{
    double m = 0.0;
    for (double s : forward_diff(field)) m = std::max(m, std::abs(s));
    return m;
}

double l2_norm(const ScalarField& field)
{
    const auto u = field.values();
    const std::size_t n = u.size() - 1;
    double sum = 0.5 * (u[0] * u[0] + u[n] * u[n]);
    for (std::size_t i = 1; i < n; ++i) sum += u[i] * u[i];
    return std::sqrt(field.grid().h() * sum);
}

double max_norm(const ScalarField& field)
{
    double m = 0.0;
    for (double v : field.values()) m = std::max(m, std::abs(v));
    return m;
}

ProblemData::ProblemData(SpaceTimeFn b, SpaceTimeFn c, SpaceTimeFn f, SpaceTimeFn g, ScalarField u0, double m, double l,
                         double check_horizon)
    : b_(std::move(b)), c_(std::move(c)), f_(std::move(f)), g_(std::move(g)), u0_(std::move(u0)), m_(m), l_(l),
      check_horizon_(check_horizon)
{
    require(b_ && c_ && f_ && g_, "ProblemData: all coefficient callbacks must be set");
    require(check_horizon_ >= 0.0 && std::isfinite(check_horizon_), "ProblemData: check horizon must be >= 0");
    validate();
}

std::vector<double> ProblemData::g_at_midpoints(double t) const
{
    const Grid1D& grid = this->grid();
    std::vector<double> g(static_cast<std::size_t>(grid.n_cells()));
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = g_(grid.midpoint(i), t);
    return g;
}

ProblemData ProblemData::with_initial_state(ScalarField u0) const
{
    return ProblemData(b_, c_, f_, g_, std::move(u0), m_, l_, check_horizon_);
}

void ProblemData::validate() const
{
    auto invalid = [](const std::string& what) { fail(ErrorCode::InvalidData, "ProblemData: " + what); };

    if (!(m_ > 0.0)) invalid("m must be > 0");
    if (!std::isfinite(l_)) invalid("l must be finite");

    const Grid1D& grid = this->grid();
    const std::size_t n = grid.node_count();
    const double h = grid.h();

    if (!u0_.has_zero_trace(kFeasibilityTol)) invalid("u0 must vanish at both end nodes");
    for (double v : u0_.values())
        if (!std::isfinite(v)) invalid("u0 has non-finite values");

    const auto slopes = forward_diff(u0_);
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        const double gmax =
            std::max({g_(grid.node(i), 0.0), g_(grid.midpoint(i), 0.0), g_(grid.node(i + 1), 0.0)});
        if (std::abs(slopes[i]) > gmax + kFeasibilityTol) {
            std::ostringstream os;
            os << "u0 violates the gradient constraint on cell " << i << " (|slope| = " << std::abs(slopes[i])
               << ", g = " << gmax << ")";
            invalid(os.str());
        }
    }

    for (int k = 0; k < kTimeSamples; ++k) {
        const double t = check_horizon_ * k / (kTimeSamples - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.node(i);
            const double gx = g_(x, t);
            if (!(gx >= m_)) {
                std::ostringstream os;
                os << "g(" << x << ", " << t << ") = " << gx << " is below m = " << m_;
                invalid(os.str());
            }
            if (i + 1 < n && !(g_(grid.midpoint(i), t) >= m_)) invalid("g below m at a cell midpoint");

            double db = 0.0;
            if (i == 0)
                db = (b_(grid.node(1), t) - b_(x, t)) / h;
            else if (i + 1 == n)
                db = (b_(x, t) - b_(grid.node(i - 1), t)) / h;
            else
                db = (b_(grid.node(i + 1), t) - b_(grid.node(i - 1), t)) / (2.0 * h);
            const double coercivity = c_(x, t) - 0.5 * db;
            if (!(coercivity >= l_ - 1e-9)) {
                std::ostringstream os;
                os << "c - b'/2 = " << coercivity << " < l = " << l_ << " at (" << x << ", " << t << ")";
                invalid(os.str());
            }
        }
    }
}

void SolverParams::validate() const
{
    require(epsilon > 0.0 && epsilon < 1.0, "SolverParams: epsilon must lie in (0, 1)");
    require(delta > 0.0 && delta < 1.0, "SolverParams: delta must lie in (0, 1)");
    require(dt > 0.0 && std::isfinite(dt), "SolverParams: dt must be > 0");
    require(t_end > 0.0 && std::isfinite(t_end), "SolverParams: t_end must be > 0");
    require(picard_tol > 0.0, "SolverParams: picard_tol must be > 0");
    require(picard_max >= 1, "SolverParams: picard_max must be >= 1");
    require(constraint_tol >= 0.0, "SolverParams: constraint_tol must be >= 0");
}

SolverParams SolverParams::coupled(double h, double t_end)
{
    SolverParams p;
    p.epsilon = h * h;
    p.delta = h;
    p.dt = 0.5 * h;
    p.t_end = t_end;
    return p;
}

long step_count(const SolverParams& params)
{
    return static_cast<long>(std::floor(params.t_end / params.dt + 0.5));
}

std::vector<long> snapshot_steps(std::span<const double> snapshot_times, const SolverParams& params)
{
    const long n_steps = step_count(params);
    std::vector<long> steps{0};
    double prev = -1.0;
    for (double tau : snapshot_times) {
        require(std::isfinite(tau) && tau >= 0.0 && tau <= params.t_end + 0.5 * params.dt,
                "snapshot times must lie in [0, t_end]");
        require(tau >= prev, "snapshot times must be sorted");
        prev = tau;
        long n = static_cast<long>(std::ceil(tau / params.dt - 0.5));
        n = std::clamp(n, 0L, n_steps);
        if (n != steps.back()) steps.push_back(n);
    }
    return steps;
}

}  // namespace gcflow
