/*
 * gcflow: first-order linear transport u_t + b u_x + c u = f on an interval
 * under the gradient constraint |u_x| <= g, zero boundary values.
 *
 * C interface to the solver library. Objects are opaque handles created and
 * destroyed through this API; every fallible call returns a gcf_status and
 * leaves a message retrievable with gcf_last_error_message() on the calling
 * thread.
 *
 * Coefficient callbacks may be invoked concurrently from several threads by
 * the study drivers and must therefore be reentrant.
 */
#ifndef GCFLOW_GCFLOW_H
#define GCFLOW_GCFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(GCFLOW_BUILDING_LIBRARY)
#    define GCF_API __declspec(dllexport)
#  else
#    define GCF_API __declspec(dllimport)
#  endif
#else
#  define GCF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gcf_status {
  GCF_OK = 0,
  GCF_ERR_INVALID_ARGUMENT = 1,
  GCF_ERR_DOMAIN = 2,
  GCF_ERR_INVALID_DATA = 3,
  GCF_ERR_PICARD_DIVERGENCE = 4,
  GCF_ERR_LINEAR_SOLVE = 5,
  GCF_ERR_NO_STEADY_STATE = 6,
  GCF_ERR_BUFFER_TOO_SMALL = 7,
  GCF_ERR_INTERNAL = 99
} gcf_status;

typedef enum gcf_solver_kind {
  GCF_SOLVER_GRADIENT_PENALTY = 0, /* exponential penalty on |u_x|^2 - g^2 */
  GCF_SOLVER_OBSTACLE = 1          /* two obstacles -d <= z <= d; constant b, c = 0, g = 1 only */
} gcf_solver_kind;

typedef enum gcf_label { GCF_LABEL_LOWER = 0, GCF_LABEL_OPEN = 1, GCF_LABEL_UPPER = 2 } gcf_label;

typedef double (*gcf_space_time_fn)(double x, double t, void* user_data);

typedef struct gcf_params {
  double epsilon;     /* penalty scale, in (0, 1) */
  double delta;       /* diffusion scale, in (0, 1) */
  double dt;          /* time step */
  double t_end;       /* final time */
  double picard_tol;  /* nonlinear iteration stop (max-norm update) */
  int picard_max;     /* nonlinear iteration cap */
  double constraint_tol;
} gcf_params;

typedef struct gcf_step_diagnostics {
  double t;
  double constraint_violation;
  int picard_iterations;
  double penalty_mass;
  int overflow_events;
  int converged;
} gcf_step_diagnostics;

typedef struct gcf_free_boundaries {
  int has_xi;
  double xi;
  int has_zeta;
  double zeta;
} gcf_free_boundaries;

typedef struct gcf_stabilization_report {
  double t_star; /* +inf when the trajectory never settles */
  double target_error_at_end;
  double monotone_violation_max;
} gcf_stabilization_report;

typedef struct gcf_stationary_info {
  double pseudo_time_used;
  double steady_residual;
  long steps;
} gcf_stationary_info;

typedef struct gcf_problem gcf_problem;
typedef struct gcf_trajectory gcf_trajectory;

/* ---- errors ---------------------------------------------------------- */

GCF_API const char* gcf_status_string(gcf_status status);
GCF_API const char* gcf_last_error_message(void);

/* ---- parameters ------------------------------------------------------ */

GCF_API gcf_params gcf_params_default(void);
/* epsilon = h^2, delta = h, dt = h / 2 */
GCF_API gcf_params gcf_params_coupled(double h, double t_end);
GCF_API gcf_status gcf_params_validate(const gcf_params* params);

/* ---- problems -------------------------------------------------------- */

/* u0 holds n_cells + 1 nodal values. The callbacks and user_data must stay
 * valid for the lifetime of the problem. check_horizon is the time span over
 * which the data invariants are sampled at construction. */
GCF_API gcf_status gcf_problem_create(double x_left, double x_right, int n_cells, gcf_space_time_fn b,
                                      gcf_space_time_fn c, gcf_space_time_fn f, gcf_space_time_fn g,
                                      void* user_data, const double* u0, size_t u0_len, double m, double l,
                                      double check_horizon, gcf_problem** out);

/* The transported sandpile on (0, 1): b = 1, c = 0, g = 1, f = t. */
GCF_API gcf_status gcf_problem_create_sandpile(int n_cells, gcf_problem** out);

GCF_API void gcf_problem_destroy(gcf_problem* problem);

GCF_API size_t gcf_problem_node_count(const gcf_problem* problem);
GCF_API gcf_status gcf_problem_nodes(const gcf_problem* problem, double* out, size_t capacity);
GCF_API gcf_status gcf_problem_initial_state(const gcf_problem* problem, double* out, size_t capacity);
/* d(x) = distance to the nearer endpoint, at the nodes. */
GCF_API gcf_status gcf_problem_distance(const gcf_problem* problem, double* out, size_t capacity);

/* ---- evolution ------------------------------------------------------- */

GCF_API gcf_status gcf_solve(const gcf_problem* problem, const gcf_params* params, gcf_solver_kind kind,
                             const double* snapshot_times, size_t n_times, gcf_trajectory** out);

GCF_API void gcf_trajectory_destroy(gcf_trajectory* traj);
GCF_API size_t gcf_trajectory_snapshot_count(const gcf_trajectory* traj);
GCF_API size_t gcf_trajectory_node_count(const gcf_trajectory* traj);
GCF_API gcf_status gcf_trajectory_time(const gcf_trajectory* traj, size_t index, double* out);
GCF_API gcf_status gcf_trajectory_snapshot(const gcf_trajectory* traj, size_t index, double* out, size_t capacity);
GCF_API size_t gcf_trajectory_step_count(const gcf_trajectory* traj);
GCF_API gcf_status gcf_trajectory_step_diagnostics(const gcf_trajectory* traj, size_t index,
                                                   gcf_step_diagnostics* out);

/* ---- measurements ---------------------------------------------------- */

/* max over cells of (|Du| - g)^+ for snapshot `index`, g taken from `problem`
 * at the snapshot time. */
GCF_API gcf_status gcf_constraint_violation(const gcf_problem* problem, const gcf_trajectory* traj, size_t index,
                                            double* out);

GCF_API gcf_status gcf_max_gradient(const double* values, size_t n, double h, double* out);

/* Per-snapshot max-norm and L2 errors against the exact sandpile profile. */
GCF_API gcf_status gcf_sandpile_errors(const gcf_trajectory* traj, double* linf, double* l2, size_t capacity);

/* Free boundaries of snapshot `index` against the band [-d, d]. */
GCF_API gcf_status gcf_free_boundaries_at(const gcf_trajectory* traj, size_t index, double tol,
                                          gcf_free_boundaries* out);

/* Same extraction for n nodal values on the problem's grid. */
GCF_API gcf_status gcf_free_boundaries_of(const gcf_problem* problem, const double* field, size_t n, double tol,
                                          gcf_free_boundaries* out);

GCF_API gcf_status gcf_coincidence_partition(const gcf_trajectory* traj, size_t index, double tol, gcf_label* out,
                                             size_t capacity);

GCF_API gcf_status gcf_detect_stabilization(const gcf_trajectory* traj, const double* target, size_t n, double tol,
                                            gcf_stabilization_report* out);

/* out[i] = v[i] / (1 + alpha / m) */
GCF_API gcf_status gcf_rescale_into_constraint(const double* v, size_t n, double alpha, double m, double* out);

/* ---- stationary problem and studies ---------------------------------- */

/* Pass t_max <= 0 for the default budget 50 / l. */
GCF_API gcf_status gcf_solve_stationary(const gcf_problem* problem, const gcf_params* params, double steady_tol,
                                        double t_max, double* solution, size_t capacity, gcf_stationary_info* info);

GCF_API gcf_status gcf_stability_study(const gcf_problem* base, const gcf_problem* perturbed,
                                       const gcf_params* params, double* sup_l2_sq_diff, double* data_distance);

GCF_API gcf_status gcf_asymptotic_study(const gcf_problem* problem, const gcf_params* params, const double* u_inf,
                                        size_t n, const double* sample_times, size_t n_times, double* distances);

/* ---- exact sandpile -------------------------------------------------- */

GCF_API gcf_status gcf_sandpile_xi(double t, double* out);
GCF_API gcf_status gcf_sandpile_zeta(double t, double* out);
GCF_API gcf_status gcf_sandpile_distance(double x, double* out);
GCF_API gcf_status gcf_sandpile_initial_profile(double x, double* out);
GCF_API gcf_status gcf_sandpile_profile(double x, double t, double* out);
GCF_API gcf_status gcf_sandpile_coincidence_label(double x, double t, gcf_label* out);

#ifdef __cplusplus
}
#endif

#endif /* GCFLOW_GCFLOW_H */
