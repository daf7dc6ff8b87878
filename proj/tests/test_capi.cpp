#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "gcflow/gcflow.h"

namespace {

struct Coefficients {
    double b, c, f, g;
};

double cb(double, double, void* u) { return static_cast<Coefficients*>(u)->b; }
double cc(double, double, void* u) { return static_cast<Coefficients*>(u)->c; }
double cf(double, double, void* u) { return static_cast<Coefficients*>(u)->f; }
double cg(double, double, void* u) { return static_cast<Coefficients*>(u)->g; }

}  // namespace

TEST_CASE("status strings and parameters")
{
    CHECK(std::string(gcf_status_string(GCF_OK)) == "ok");
    CHECK(std::string(gcf_status_string(GCF_ERR_BUFFER_TOO_SMALL)).find("buffer") != std::string::npos);

    const gcf_params p = gcf_params_default();
    CHECK(p.epsilon == 1e-4);
    CHECK(p.delta == 1e-3);
    CHECK(p.dt == 5e-4);
    CHECK(gcf_params_validate(&p) == GCF_OK);

    gcf_params bad = p;
    bad.epsilon = 1.5;
    CHECK(gcf_params_validate(&bad) == GCF_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(gcf_last_error_message()) > 0);
    CHECK(gcf_params_validate(nullptr) == GCF_ERR_INVALID_ARGUMENT);

    const gcf_params c = gcf_params_coupled(0.01, 2.0);
    CHECK(c.epsilon == doctest::Approx(1e-4));
    CHECK(c.delta == doctest::Approx(0.01));
    CHECK(c.dt == doctest::Approx(0.005));
}

TEST_CASE("exact sandpile through the C interface")
{
    double v = 0.0;
    CHECK(gcf_sandpile_xi(0.0, &v) == GCF_OK);
    CHECK(v == doctest::Approx(std::sqrt(3.0) - 1.0));
    CHECK(gcf_sandpile_zeta(1.125, &v) == GCF_OK);
    CHECK(v == doctest::Approx(0.25));
    CHECK(gcf_sandpile_distance(0.75, &v) == GCF_OK);
    CHECK(v == doctest::Approx(0.25));
    CHECK(gcf_sandpile_initial_profile(1.0, &v) == GCF_OK);
    CHECK(v == 0.0);
    CHECK(gcf_sandpile_profile(0.5, 0.75, &v) == GCF_OK);
    CHECK(v == doctest::Approx(0.25));
    gcf_label label{};
    CHECK(gcf_sandpile_coincidence_label(0.9, 0.25, &label) == GCF_OK);
    CHECK(label == GCF_LABEL_LOWER);

    CHECK(gcf_sandpile_xi(2.0, &v) == GCF_ERR_DOMAIN);
    CHECK(gcf_sandpile_zeta(0.5, &v) == GCF_ERR_DOMAIN);
    CHECK(gcf_sandpile_profile(0.5, 0.75, nullptr) == GCF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("sandpile solve and measurements")
{
    gcf_problem* problem = nullptr;
    REQUIRE(gcf_problem_create_sandpile(200, &problem) == GCF_OK);
    const size_t n = gcf_problem_node_count(problem);
    CHECK(n == 201);

    std::vector<double> x(n), d(n);
    CHECK(gcf_problem_nodes(problem, x.data(), n) == GCF_OK);
    CHECK(x.back() == 1.0);
    CHECK(gcf_problem_distance(problem, d.data(), n) == GCF_OK);
    CHECK(d[100] == doctest::Approx(0.5));
    CHECK(gcf_problem_nodes(problem, x.data(), n - 1) == GCF_ERR_BUFFER_TOO_SMALL);

    const gcf_params p = gcf_params_default();
    const double times[] = {0.75, 1.125, 1.25, 2.0};
    gcf_trajectory* traj = nullptr;
    REQUIRE(gcf_solve(problem, &p, GCF_SOLVER_GRADIENT_PENALTY, times, 4, &traj) == GCF_OK);
    CHECK(gcf_trajectory_snapshot_count(traj) == 5);
    CHECK(gcf_trajectory_node_count(traj) == n);
    CHECK(gcf_trajectory_step_count(traj) == 4000);

    double t = 0.0;
    CHECK(gcf_trajectory_time(traj, 2, &t) == GCF_OK);
    CHECK(t == doctest::Approx(1.125));
    CHECK(gcf_trajectory_time(traj, 9, &t) == GCF_ERR_INVALID_ARGUMENT);

    std::vector<double> linf(5), l2(5);
    CHECK(gcf_sandpile_errors(traj, linf.data(), l2.data(), 5) == GCF_OK);
    for (double e : linf) CHECK(e <= 0.05);
    CHECK(gcf_sandpile_errors(traj, linf.data(), l2.data(), 2) == GCF_ERR_BUFFER_TOO_SMALL);

    gcf_step_diagnostics diag{};
    CHECK(gcf_trajectory_step_diagnostics(traj, 0, &diag) == GCF_OK);
    CHECK(diag.t == doctest::Approx(5e-4));
    CHECK(diag.converged == 1);

    double violation = -1.0;
    CHECK(gcf_constraint_violation(problem, traj, 4, &violation) == GCF_OK);
    CHECK(violation >= 0.0);
    CHECK(violation <= 0.02);

    gcf_free_boundaries fb{};
    CHECK(gcf_free_boundaries_at(traj, 2, 0.2 / 200, &fb) == GCF_OK);
    CHECK(fb.has_xi == 1);
    CHECK(fb.has_zeta == 1);
    CHECK(std::abs(fb.zeta - 0.25) <= 3.0 / 200 + 0.01);

    std::vector<double> snap(n);
    CHECK(gcf_trajectory_snapshot(traj, 2, snap.data(), n) == GCF_OK);
    gcf_free_boundaries fb2{};
    CHECK(gcf_free_boundaries_of(problem, snap.data(), n, 0.2 / 200, &fb2) == GCF_OK);
    CHECK(fb2.xi == fb.xi);
    CHECK(fb2.zeta == fb.zeta);

    std::vector<gcf_label> labels(n);
    CHECK(gcf_coincidence_partition(traj, 4, 0.01, labels.data(), n) == GCF_OK);
    CHECK(labels[100] == GCF_LABEL_UPPER);

    gcf_stabilization_report report{};
    CHECK(gcf_detect_stabilization(traj, d.data(), n, 0.02, &report) == GCF_OK);
    CHECK(report.t_star == doctest::Approx(1.25));

    gcf_trajectory_destroy(traj);
    gcf_problem_destroy(problem);
}

TEST_CASE("obstacle solver rejects unsupported data")
{
    Coefficients k{0.0, 1.0, 1.0, 1.0};
    std::vector<double> u0(41, 0.0);
    gcf_problem* problem = nullptr;
    REQUIRE(gcf_problem_create(0.0, 1.0, 40, cb, cc, cf, cg, &k, u0.data(), u0.size(), 1.0, 1.0, 1.0, &problem) ==
            GCF_OK);
    gcf_params p = gcf_params_default();
    p.t_end = 0.01;
    gcf_trajectory* traj = nullptr;
    CHECK(gcf_solve(problem, &p, GCF_SOLVER_OBSTACLE, nullptr, 0, &traj) == GCF_ERR_INVALID_ARGUMENT);
    CHECK(traj == nullptr);
    CHECK(gcf_solve(problem, &p, static_cast<gcf_solver_kind>(7), nullptr, 0, &traj) == GCF_ERR_INVALID_ARGUMENT);
    gcf_problem_destroy(problem);
}

TEST_CASE("invalid problems are reported, not thrown")
{
    Coefficients k{1.0, 0.0, 0.0, 1.0};
    std::vector<double> steep(21, 0.0);
    steep[10] = 1.0;  // slope 20
    gcf_problem* problem = nullptr;
    CHECK(gcf_problem_create(0.0, 1.0, 20, cb, cc, cf, cg, &k, steep.data(), steep.size(), 1.0, 0.0, 1.0, &problem) ==
          GCF_ERR_INVALID_DATA);
    CHECK(problem == nullptr);
    CHECK(std::string(gcf_last_error_message()).find("gradient") != std::string::npos);

    std::vector<double> short_u0(5, 0.0);
    CHECK(gcf_problem_create(0.0, 1.0, 20, cb, cc, cf, cg, &k, short_u0.data(), 5, 1.0, 0.0, 1.0, &problem) ==
          GCF_ERR_INVALID_ARGUMENT);
    CHECK(gcf_problem_create_sandpile(2, &problem) == GCF_ERR_INVALID_ARGUMENT);
    CHECK(gcf_problem_create_sandpile(10, nullptr) == GCF_ERR_INVALID_ARGUMENT);

    gcf_problem_destroy(nullptr);
    gcf_trajectory_destroy(nullptr);
    CHECK(gcf_problem_node_count(nullptr) == 0);
}

TEST_CASE("stationary solve through callbacks")
{
    Coefficients k{0.0, 1.0, 2.0, 1.0};
    std::vector<double> u0(101, 0.0);
    gcf_problem* problem = nullptr;
    REQUIRE(gcf_problem_create(0.0, 1.0, 100, cb, cc, cf, cg, &k, u0.data(), u0.size(), 1.0, 1.0, 1.0, &problem) ==
            GCF_OK);
    gcf_params p = gcf_params_default();
    p.dt = 0.01;
    std::vector<double> u(101), d(101);
    gcf_stationary_info info{};
    CHECK(gcf_solve_stationary(problem, &p, 1e-6, 0.0, u.data(), u.size(), &info) == GCF_OK);
    CHECK(gcf_problem_distance(problem, d.data(), d.size()) == GCF_OK);
    double worst = 0.0;
    for (size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(u[i] - d[i]));
    CHECK(worst <= 2.0 / 100 + 0.02);
    CHECK(info.steps > 0);
    CHECK(info.steady_residual <= 1e-6);

    CHECK(gcf_solve_stationary(problem, &p, 1e-6, 0.02, u.data(), u.size(), &info) == GCF_ERR_NO_STEADY_STATE);
    gcf_problem_destroy(problem);
}

TEST_CASE("array helpers")
{
    const double v[] = {0.0, 0.1, 0.3, 0.0};
    double g = 0.0;
    CHECK(gcf_max_gradient(v, 4, 0.1, &g) == GCF_OK);
    CHECK(g == doctest::Approx(3.0));
    CHECK(gcf_max_gradient(v, 1, 0.1, &g) == GCF_ERR_INVALID_ARGUMENT);

    double out[4];
    CHECK(gcf_rescale_into_constraint(v, 4, 0.5, 0.5, out) == GCF_OK);
    CHECK(out[2] == doctest::Approx(0.15));
    CHECK(gcf_rescale_into_constraint(v, 4, 0.5, 0.0, out) == GCF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("error messages are per thread")
{
    gcf_params bad = gcf_params_default();
    bad.delta = -1.0;
    CHECK(gcf_params_validate(&bad) == GCF_ERR_INVALID_ARGUMENT);
    const std::string here = gcf_last_error_message();
    std::string there = "unset";
    std::thread([&] {
        double v = 0.0;
        gcf_sandpile_xi(0.1, &v);
        there = gcf_last_error_message();
    }).join();
    CHECK(there.empty());
    CHECK(std::string(gcf_last_error_message()) == here);
}
