#include "gcflow/gcflow.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "gcflow/core.hpp"
#include "gcflow/diagnostics.hpp"
#include "gcflow/obstacle_solver.hpp"
#include "gcflow/oracle.hpp"
#include "gcflow/penalty_solver.hpp"
#include "gcflow/stationary.hpp"

struct gcf_problem {
    gcflow::ProblemData data;
};

struct gcf_trajectory {
    gcflow::Trajectory traj;
    gcflow::ScalarField obstacle;
};

namespace {

thread_local std::string last_error;

gcf_status to_status(gcflow::ErrorCode code)
{
    using gcflow::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidArgument: return GCF_ERR_INVALID_ARGUMENT;
    case ErrorCode::DomainError: return GCF_ERR_DOMAIN;
    case ErrorCode::InvalidData: return GCF_ERR_INVALID_DATA;
    case ErrorCode::PicardDivergence: return GCF_ERR_PICARD_DIVERGENCE;
    case ErrorCode::LinearSolveFailure: return GCF_ERR_LINEAR_SOLVE;
    case ErrorCode::NoSteadyState: return GCF_ERR_NO_STEADY_STATE;
    }
    return GCF_ERR_INTERNAL;
}

gcf_status set_error(gcf_status status, std::string message)
{
    last_error = std::move(message);
    return status;
}

// Runs `body` and converts exceptions into status codes.
template <class Body>
gcf_status guarded(Body&& body) noexcept
{
    try {
        last_error.clear();
        return body();
    } catch (const gcflow::Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(GCF_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(GCF_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(GCF_ERR_INTERNAL, "unknown error");
    }
}

gcf_status null_argument(const char* fn) { return set_error(GCF_ERR_INVALID_ARGUMENT, std::string(fn) + ": null argument"); }

gcf_status copy_out(std::span<const double> values, double* out, size_t capacity)
{
    if (capacity < values.size())
        return set_error(GCF_ERR_BUFFER_TOO_SMALL,
                         "output buffer holds " + std::to_string(capacity) + ", need " + std::to_string(values.size()));
    std::copy(values.begin(), values.end(), out);
    return GCF_OK;
}

gcflow::SolverParams from_c(const gcf_params& p)
{
    gcflow::SolverParams s;
    s.epsilon = p.epsilon;
    s.delta = p.delta;
    s.dt = p.dt;
    s.t_end = p.t_end;
    s.picard_tol = p.picard_tol;
    s.picard_max = p.picard_max;
    s.constraint_tol = p.constraint_tol;
    return s;
}

gcf_params to_c(const gcflow::SolverParams& s)
{
    return gcf_params{s.epsilon, s.delta, s.dt, s.t_end, s.picard_tol, s.picard_max, s.constraint_tol};
}

gcf_label to_c(gcflow::Label label)
{
    switch (label) {
    case gcflow::Label::Lower: return GCF_LABEL_LOWER;
    case gcflow::Label::Open: return GCF_LABEL_OPEN;
    case gcflow::Label::Upper: return GCF_LABEL_UPPER;
    }
    return GCF_LABEL_OPEN;
}

gcf_status scalar_oracle(double arg, double* out, double (*fn)(double), const char* name)
{
    if (!out) return null_argument(name);
    return guarded([&] {
        *out = fn(arg);
        return GCF_OK;
    });
}

}  // namespace

extern "C" {

const char* gcf_status_string(gcf_status status)
{
    switch (status) {
    case GCF_OK: return "ok";
    case GCF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GCF_ERR_DOMAIN: return "argument outside domain";
    case GCF_ERR_INVALID_DATA: return "invalid problem data";
    case GCF_ERR_PICARD_DIVERGENCE: return "nonlinear iteration diverged";
    case GCF_ERR_LINEAR_SOLVE: return "linear solve failure";
    case GCF_ERR_NO_STEADY_STATE: return "no steady state reached";
    case GCF_ERR_BUFFER_TOO_SMALL: return "output buffer too small";
    case GCF_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* gcf_last_error_message(void) { return last_error.c_str(); }

gcf_params gcf_params_default(void) { return to_c(gcflow::SolverParams{}); }

gcf_params gcf_params_coupled(double h, double t_end) { return to_c(gcflow::SolverParams::coupled(h, t_end)); }

gcf_status gcf_params_validate(const gcf_params* params)
{
    if (!params) return null_argument("gcf_params_validate");
    return guarded([&] {
        from_c(*params).validate();
        return GCF_OK;
    });
}

gcf_status gcf_problem_create(double x_left, double x_right, int n_cells, gcf_space_time_fn b, gcf_space_time_fn c,
                              gcf_space_time_fn f, gcf_space_time_fn g, void* user_data, const double* u0,
                              size_t u0_len, double m, double l, double check_horizon, gcf_problem** out)
{
    if (!out || !b || !c || !f || !g || !u0) return null_argument("gcf_problem_create");
    *out = nullptr;
    return guarded([&] {
        const gcflow::Grid1D grid(x_left, x_right, n_cells);
        gcflow::ScalarField init(grid, std::vector<double>(u0, u0 + u0_len));
        auto wrap = [user_data](gcf_space_time_fn fn) {
            return [fn, user_data](double x, double t) { return fn(x, t, user_data); };
        };
        *out = new gcf_problem{gcflow::ProblemData(wrap(b), wrap(c), wrap(f), wrap(g), std::move(init), m, l,
                                                   check_horizon)};
        return GCF_OK;
    });
}

gcf_status gcf_problem_create_sandpile(int n_cells, gcf_problem** out)
{
    if (!out) return null_argument("gcf_problem_create_sandpile");
    *out = nullptr;
    return guarded([&] {
        *out = new gcf_problem{gcflow::sandpile::make_problem(n_cells)};
        return GCF_OK;
    });
}

void gcf_problem_destroy(gcf_problem* problem) { delete problem; }

size_t gcf_problem_node_count(const gcf_problem* problem) { return problem ? problem->data.grid().node_count() : 0; }

gcf_status gcf_problem_nodes(const gcf_problem* problem, double* out, size_t capacity)
{
    if (!problem || !out) return null_argument("gcf_problem_nodes");
    return guarded([&] { return copy_out(problem->data.grid().nodes(), out, capacity); });
}

gcf_status gcf_problem_initial_state(const gcf_problem* problem, double* out, size_t capacity)
{
    if (!problem || !out) return null_argument("gcf_problem_initial_state");
    return guarded([&] { return copy_out(problem->data.u0().values(), out, capacity); });
}

gcf_status gcf_problem_distance(const gcf_problem* problem, double* out, size_t capacity)
{
    if (!problem || !out) return null_argument("gcf_problem_distance");
    return guarded([&] {
        return copy_out(gcflow::obstacle::distance_obstacle(problem->data.grid()).values(), out, capacity);
    });
}

gcf_status gcf_solve(const gcf_problem* problem, const gcf_params* params, gcf_solver_kind kind,
                     const double* snapshot_times, size_t n_times, gcf_trajectory** out)
{
    if (!problem || !params || !out || (n_times > 0 && !snapshot_times)) return null_argument("gcf_solve");
    *out = nullptr;
    return guarded([&] {
        const gcflow::SolverParams p = from_c(*params);
        const std::span<const double> times(snapshot_times, n_times);
        gcflow::Trajectory traj;
        switch (kind) {
        case GCF_SOLVER_GRADIENT_PENALTY: traj = gcflow::penalty::solve(problem->data, p, times); break;
        case GCF_SOLVER_OBSTACLE: traj = gcflow::obstacle::solve(problem->data, p, times); break;
        default: return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_solve: unknown solver kind");
        }
        *out = new gcf_trajectory{std::move(traj), gcflow::obstacle::distance_obstacle(problem->data.grid())};
        return GCF_OK;
    });
}

void gcf_trajectory_destroy(gcf_trajectory* traj) { delete traj; }

size_t gcf_trajectory_snapshot_count(const gcf_trajectory* traj) { return traj ? traj->traj.size() : 0; }

size_t gcf_trajectory_node_count(const gcf_trajectory* traj) { return traj ? traj->obstacle.size() : 0; }

gcf_status gcf_trajectory_time(const gcf_trajectory* traj, size_t index, double* out)
{
    if (!traj || !out) return null_argument("gcf_trajectory_time");
    if (index >= traj->traj.size()) return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_trajectory_time: index out of range");
    *out = traj->traj.times[index];
    return GCF_OK;
}

gcf_status gcf_trajectory_snapshot(const gcf_trajectory* traj, size_t index, double* out, size_t capacity)
{
    if (!traj || !out) return null_argument("gcf_trajectory_snapshot");
    if (index >= traj->traj.size())
        return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_trajectory_snapshot: index out of range");
    return copy_out(traj->traj.snapshots[index].values(), out, capacity);
}

size_t gcf_trajectory_step_count(const gcf_trajectory* traj) { return traj ? traj->traj.diagnostics.size() : 0; }

gcf_status gcf_trajectory_step_diagnostics(const gcf_trajectory* traj, size_t index, gcf_step_diagnostics* out)
{
    if (!traj || !out) return null_argument("gcf_trajectory_step_diagnostics");
    if (index >= traj->traj.diagnostics.size())
        return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_trajectory_step_diagnostics: index out of range");
    const gcflow::StepDiagnostics& d = traj->traj.diagnostics[index];
    *out = gcf_step_diagnostics{d.t, d.constraint_violation, d.picard_iterations, d.penalty_mass, d.overflow_events,
                                d.converged ? 1 : 0};
    return GCF_OK;
}

gcf_status gcf_constraint_violation(const gcf_problem* problem, const gcf_trajectory* traj, size_t index, double* out)
{
    if (!problem || !traj || !out) return null_argument("gcf_constraint_violation");
    if (index >= traj->traj.size())
        return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_constraint_violation: index out of range");
    return guarded([&] {
        const auto& snap = traj->traj.snapshots[index];
        *out = gcflow::penalty::constraint_violation(snap, problem->data.g_at_midpoints(traj->traj.times[index]));
        return GCF_OK;
    });
}

gcf_status gcf_max_gradient(const double* values, size_t n, double h, double* out)
{
    if (!values || !out) return null_argument("gcf_max_gradient");
    if (n < 2 || !(h > 0.0)) return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_max_gradient: need n >= 2 and h > 0");
    double m = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) m = std::max(m, std::abs(values[i + 1] - values[i]) / h);
    *out = m;
    return GCF_OK;
}

gcf_status gcf_sandpile_errors(const gcf_trajectory* traj, double* linf, double* l2, size_t capacity)
{
    if (!traj || !linf || !l2) return null_argument("gcf_sandpile_errors");
    if (capacity < traj->traj.size())
        return set_error(GCF_ERR_BUFFER_TOO_SMALL, "gcf_sandpile_errors: need one slot per snapshot");
    return guarded([&] {
        const auto errors = gcflow::diagnostics::error_vs_oracle(traj->traj, gcflow::sandpile::profile);
        for (size_t k = 0; k < errors.size(); ++k) {
            linf[k] = errors[k].linf;
            l2[k] = errors[k].l2;
        }
        return GCF_OK;
    });
}

gcf_status gcf_free_boundaries_at(const gcf_trajectory* traj, size_t index, double tol, gcf_free_boundaries* out)
{
    if (!traj || !out) return null_argument("gcf_free_boundaries_at");
    if (index >= traj->traj.size())
        return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_free_boundaries_at: index out of range");
    return guarded([&] {
        const auto fb = gcflow::diagnostics::extract_free_boundaries(traj->traj.snapshots[index], traj->obstacle, tol);
        *out = gcf_free_boundaries{fb.xi.has_value() ? 1 : 0, fb.xi.value_or(NAN), fb.zeta.has_value() ? 1 : 0,
                                   fb.zeta.value_or(NAN)};
        return GCF_OK;
    });
}

gcf_status gcf_free_boundaries_of(const gcf_problem* problem, const double* field, size_t n, double tol,
                                  gcf_free_boundaries* out)
{
    if (!problem || !field || !out) return null_argument("gcf_free_boundaries_of");
    return guarded([&] {
        const gcflow::Grid1D& grid = problem->data.grid();
        const gcflow::ScalarField values(grid, std::vector<double>(field, field + n));
        const auto fb =
            gcflow::diagnostics::extract_free_boundaries(values, gcflow::obstacle::distance_obstacle(grid), tol);
        *out = gcf_free_boundaries{fb.xi.has_value() ? 1 : 0, fb.xi.value_or(NAN), fb.zeta.has_value() ? 1 : 0,
                                   fb.zeta.value_or(NAN)};
        return GCF_OK;
    });
}

gcf_status gcf_coincidence_partition(const gcf_trajectory* traj, size_t index, double tol, gcf_label* out,
                                     size_t capacity)
{
    if (!traj || !out) return null_argument("gcf_coincidence_partition");
    if (index >= traj->traj.size())
        return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_coincidence_partition: index out of range");
    if (capacity < traj->obstacle.size())
        return set_error(GCF_ERR_BUFFER_TOO_SMALL, "gcf_coincidence_partition: need one slot per node");
    return guarded([&] {
        const auto labels = gcflow::obstacle::coincidence_partition(traj->traj.snapshots[index], traj->obstacle, tol);
        for (size_t i = 0; i < labels.size(); ++i) out[i] = to_c(labels[i]);
        return GCF_OK;
    });
}

gcf_status gcf_detect_stabilization(const gcf_trajectory* traj, const double* target, size_t n, double tol,
                                    gcf_stabilization_report* out)
{
    if (!traj || !target || !out) return null_argument("gcf_detect_stabilization");
    return guarded([&] {
        const gcflow::ScalarField tgt(traj->obstacle.grid(), std::vector<double>(target, target + n));
        const auto r = gcflow::diagnostics::detect_stabilization(traj->traj, tgt, tol);
        *out = gcf_stabilization_report{r.t_star_numeric, r.target_error_at_end, r.monotone_violation_max};
        return GCF_OK;
    });
}

gcf_status gcf_rescale_into_constraint(const double* v, size_t n, double alpha, double m, double* out)
{
    if (!v || !out) return null_argument("gcf_rescale_into_constraint");
    if (!(m > 0.0) || !(alpha >= 0.0))
        return set_error(GCF_ERR_INVALID_ARGUMENT, "gcf_rescale_into_constraint: need m > 0 and alpha >= 0");
    const double psi = 1.0 + alpha / m;
    for (size_t i = 0; i < n; ++i) out[i] = v[i] / psi;
    return GCF_OK;
}

gcf_status gcf_solve_stationary(const gcf_problem* problem, const gcf_params* params, double steady_tol, double t_max,
                                double* solution, size_t capacity, gcf_stationary_info* info)
{
    if (!problem || !params || !solution) return null_argument("gcf_solve_stationary");
    return guarded([&] {
        const auto result = gcflow::solve_stationary(problem->data, from_c(*params), steady_tol, t_max);
        const gcf_status st = copy_out(result.solution.values(), solution, capacity);
        if (st == GCF_OK && info) *info = gcf_stationary_info{result.pseudo_time_used, result.steady_residual, result.steps};
        return st;
    });
}

gcf_status gcf_stability_study(const gcf_problem* base, const gcf_problem* perturbed, const gcf_params* params,
                               double* sup_l2_sq_diff, double* data_distance)
{
    if (!base || !perturbed || !params || !sup_l2_sq_diff || !data_distance) return null_argument("gcf_stability_study");
    return guarded([&] {
        const auto r = gcflow::diagnostics::stability_study(base->data, perturbed->data, from_c(*params));
        *sup_l2_sq_diff = r.sup_l2_sq_diff;
        *data_distance = r.data_distance;
        return GCF_OK;
    });
}

gcf_status gcf_asymptotic_study(const gcf_problem* problem, const gcf_params* params, const double* u_inf, size_t n,
                                const double* sample_times, size_t n_times, double* distances)
{
    if (!problem || !params || !u_inf || !distances || (n_times > 0 && !sample_times))
        return null_argument("gcf_asymptotic_study");
    return guarded([&] {
        const gcflow::ScalarField target(problem->data.grid(), std::vector<double>(u_inf, u_inf + n));
        const auto d = gcflow::diagnostics::asymptotic_study(problem->data, from_c(*params), target,
                                                             std::span<const double>(sample_times, n_times));
        std::copy(d.begin(), d.end(), distances);
        return GCF_OK;
    });
}

gcf_status gcf_sandpile_xi(double t, double* out) { return scalar_oracle(t, out, gcflow::sandpile::xi, "gcf_sandpile_xi"); }

gcf_status gcf_sandpile_zeta(double t, double* out)
{
    return scalar_oracle(t, out, gcflow::sandpile::zeta, "gcf_sandpile_zeta");
}

gcf_status gcf_sandpile_distance(double x, double* out)
{
    return scalar_oracle(x, out, gcflow::sandpile::distance, "gcf_sandpile_distance");
}

gcf_status gcf_sandpile_initial_profile(double x, double* out)
{
    return scalar_oracle(x, out, gcflow::sandpile::initial_profile, "gcf_sandpile_initial_profile");
}

gcf_status gcf_sandpile_profile(double x, double t, double* out)
{
    if (!out) return null_argument("gcf_sandpile_profile");
    return guarded([&] {
        *out = gcflow::sandpile::profile(x, t);
        return GCF_OK;
    });
}

gcf_status gcf_sandpile_coincidence_label(double x, double t, gcf_label* out)
{
    if (!out) return null_argument("gcf_sandpile_coincidence_label");
    return guarded([&] {
        *out = to_c(gcflow::sandpile::coincidence_label(x, t));
        return GCF_OK;
    });
}

}  // extern "C"
