#include "gcflow/penalty_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gcflow/time_march.hpp"
#include "gcflow/tridiagonal.hpp"

namespace gcflow::penalty {
namespace {

struct Coefficients {
    std::vector<double> b, c, f;  // at nodes
    std::vector<double> g2;       // g^2 at cell midpoints
};

Coefficients sample(const ProblemData& data, double t)
{
    const Grid1D& grid = data.grid();
    const std::size_t n = grid.node_count();
    Coefficients co{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                    std::vector<double>(n - 1)};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(i);
        co.b[i] = data.b(x, t);
        co.c[i] = data.c(x, t);
        co.f[i] = data.f(x, t);
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double g = data.g(grid.midpoint(j), t);
        co.g2[j] = g * g;
    }
    return co;
}

// Cell fluxes delta * k_eps(p^2 - g^2) * p and their derivatives in p.
struct Fluxes {
    std::vector<double> kappa, flux, dflux;
    int capped = 0;
};

void evaluate_fluxes(std::span<const double> u, double h, const Coefficients& co, const SolverParams& params,
                     Fluxes& out)
{
    const std::size_t cells = u.size() - 1;
    out.kappa.resize(cells);
    out.flux.resize(cells);
    out.dflux.resize(cells);
    for (std::size_t j = 0; j < cells; ++j) {
        const double p = (u[j + 1] - u[j]) / h;
        const double s = p * p - co.g2[j];
        const KEps k = k_eps_checked(s, params.epsilon);
        out.capped += k.capped ? 1 : 0;
        // d/dp k_eps(p^2 - g^2) = k * 2p / eps on the exponential branch.
        const double dk = (s > 0.0 && !k.capped) ? k.value * 2.0 * p / params.epsilon : 0.0;
        out.kappa[j] = k.value;
        out.flux[j] = params.delta * k.value * p;
        out.dflux[j] = params.delta * (k.value + dk * p);
    }
}

double upwind_derivative(std::span<const double> u, std::size_t i, double b, double h)
{
    return b >= 0.0 ? (u[i] - u[i - 1]) / h : (u[i + 1] - u[i]) / h;
}

// Max-norm of the discrete equation residual at interior nodes.
double residual(std::span<const double> u, std::span<const double> u_old, double h, double dt, const Coefficients& co,
                const Fluxes& fl, std::vector<double>& r)
{
    const std::size_t n = u.size();
    r.assign(n, 0.0);
    double norm = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        r[i] = (u[i] - u_old[i]) / dt - (fl.flux[i] - fl.flux[i - 1]) / h + co.b[i] * upwind_derivative(u, i, co.b[i], h) +
               co.c[i] * u[i] - co.f[i];
        norm = std::max(norm, std::abs(r[i]));
    }
    return norm;
}

double max_exponent_growth(std::span<const double> u, std::span<const double> trial, double h, const Coefficients& co,
                           double epsilon)
{
    double growth = 0.0;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) {
        const double p0 = (u[j + 1] - u[j]) / h;
        const double p1 = (trial[j + 1] - trial[j]) / h;
        const double a0 = std::max((p0 * p0 - co.g2[j]) / epsilon, 0.0);
        const double a1 = (p1 * p1 - co.g2[j]) / epsilon;
        growth = std::max(growth, a1 - a0);
    }
    return growth;
}

}  // namespace

KEps k_eps_checked(double s, double epsilon)
{
    if (s <= 0.0) return {1.0, false};
    const double arg = s / epsilon;
    if (arg > kMaxExponent) return {std::exp(kMaxExponent), true};
    return {std::exp(arg), false};
}

PenaltyState initial_state(const ProblemData& data) { return PenaltyState{data.u0(), 0.0, 0, 0.0}; }

PenaltyState step(const PenaltyState& state, const ProblemData& data, const SolverParams& params,
                  StepDiagnostics* diagnostics)
{
    return advance_to(state, state.t + params.dt, data, params, diagnostics);
}

PenaltyState advance_to(const PenaltyState& state, double t_next, const ProblemData& data, const SolverParams& params,
                        StepDiagnostics* diagnostics)
{
    params.validate();
    require(state.current.grid() == data.grid(), "penalty::step: state and data grids differ");
    require(t_next <= params.t_end + 0.5 * params.dt, "penalty::step: stepping past t_end");
    const double dt = t_next - state.t;
    require(dt > 0.0, "penalty::step: time must advance");

    const Grid1D& grid = data.grid();
    const double h = grid.h();
    const std::size_t n = grid.node_count();
    const std::size_t m = n - 2;  // interior unknowns
    const Coefficients co = sample(data, t_next);

    const auto u_old = state.current.values();
    std::vector<double> u(u_old.begin(), u_old.end());
    u.front() = 0.0;
    u.back() = 0.0;

    Fluxes fl;
    std::vector<double> r, lower(m), diag(m), upper(m), du(m), trial(n);
    int capped = 0;

    evaluate_fluxes(u, h, co, params, fl);
    capped += fl.capped;
    const double r0 = residual(u, u_old, h, dt, co, fl, r);

    int iterations = 0;
    bool converged = false;
    while (iterations < params.picard_max) {
        ++iterations;
        const double inv_h2 = 1.0 / (h * h);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = k + 1;
            const double b = co.b[i];
            diag[k] = 1.0 / dt + (fl.dflux[i] + fl.dflux[i - 1]) * inv_h2 + co.c[i] + std::abs(b) / h;
            lower[k] = -fl.dflux[i - 1] * inv_h2 - (b >= 0.0 ? b / h : 0.0);
            upper[k] = -fl.dflux[i] * inv_h2 + (b < 0.0 ? b / h : 0.0);
            du[k] = -r[i];
        }
        solve_tridiagonal(lower, diag, upper, du);

        double lambda = 1.0;
        for (;;) {
            trial.front() = 0.0;
            trial.back() = 0.0;
            for (std::size_t k = 0; k < m; ++k) trial[k + 1] = u[k + 1] + lambda * du[k];
            if (max_exponent_growth(u, trial, h, co, params.epsilon) <= kTrustExponentIncrease || lambda < 1e-12)
                break;
            lambda *= 0.5;
        }

        // Convergence is judged on the undamped update so a trust-limited
        // step never counts as a small one.
        double change = 0.0;
        for (double v : du) change = std::max(change, std::abs(v));
        double size = 0.0;
        for (double v : trial) size = std::max(size, std::abs(v));
        u.swap(trial);
        if (!(size <= kDivergenceBound)) {
            std::ostringstream os;
            os << "nonlinear iterate exceeded " << kDivergenceBound << " in max norm";
            fail(ErrorCode::PicardDivergence, os.str());
        }

        evaluate_fluxes(u, h, co, params, fl);
        capped += fl.capped;
        residual(u, u_old, h, dt, co, fl, r);
        if (change <= params.picard_tol) {
            converged = true;
            break;
        }
    }

    if (!converged) {
        const double r_end = residual(u, u_old, h, dt, co, fl, r);
        if (r_end > r0) {
            std::ostringstream os;
            os << "no convergence in " << params.picard_max << " iterations and the residual grew (" << r0 << " -> "
               << r_end << ")";
            fail(ErrorCode::PicardDivergence, os.str());
        }
    }

    double mass = 0.0;
    for (double k : fl.kappa) mass += k * h * dt;

    PenaltyState next{ScalarField(grid, std::move(u)), t_next, iterations, state.penalty_mass_accumulated + mass};
    if (diagnostics) {
        diagnostics->t = t_next;
        diagnostics->constraint_violation = constraint_violation(next.current, data.g_at_midpoints(t_next));
        diagnostics->picard_iterations = iterations;
        diagnostics->penalty_mass = mass;
        diagnostics->overflow_events = capped;
        diagnostics->converged = converged;
    }
    return next;
}

Trajectory solve(const ProblemData& data, const SolverParams& params, std::span<const double> snapshot_times)
{
    params.validate();
    return detail::march(data, params, snapshot_times, initial_state(data),
                         [&](const PenaltyState& state, double t_next, StepDiagnostics& diag) {
                             return advance_to(state, t_next, data, params, &diag);
                         });
}

double constraint_violation(const ScalarField& field, std::span<const double> g_at_midpoints)
{
    require(g_at_midpoints.size() + 1 == field.size(), "constraint_violation: need one g value per cell");
    const auto slopes = forward_diff(field);
    double worst = 0.0;
    for (std::size_t j = 0; j < slopes.size(); ++j) worst = std::max(worst, std::abs(slopes[j]) - g_at_midpoints[j]);
    return worst;
}

}  // namespace gcflow::penalty
