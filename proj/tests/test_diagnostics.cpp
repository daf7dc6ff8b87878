#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gcflow/diagnostics.hpp"
#include "gcflow/oracle.hpp"
#include "gcflow/stationary.hpp"

using namespace gcflow;
namespace sp = gcflow::sandpile;
namespace dg = gcflow::diagnostics;

namespace {

double zero(double, double) { return 0.0; }
double one(double, double) { return 1.0; }

Trajectory oracle_trajectory(const Grid1D& grid, const std::vector<double>& times)
{
    Trajectory traj;
    for (double t : times) {
        traj.times.push_back(t);
        traj.snapshots.push_back(sp::profile_field(grid, t));
    }
    return traj;
}

}  // namespace

TEST_CASE("errors against the oracle")
{
    const Grid1D g(0.0, 1.0, 100);
    Trajectory traj = oracle_trajectory(g, {0.0, 0.5, 1.0, 1.5});
    for (const auto& e : dg::error_vs_oracle(traj, sp::profile)) {
        CHECK(e.linf == 0.0);
        CHECK(e.l2 == 0.0);
    }
    for (auto& s : traj.snapshots)
        for (std::size_t i = 1; i + 1 < s.size(); ++i) s[i] += 0.01;
    for (const auto& e : dg::error_vs_oracle(traj, sp::profile)) CHECK(e.linf == doctest::Approx(0.01));
}

TEST_CASE("free boundaries of exact samples")
{
    const double h = 1e-3;
    const Grid1D g(0.0, 1.0, 1000);
    const ScalarField d = sp::distance_field(g);
    const double tol = 1e-9;

    SUBCASE("t = 1/4")
    {
        const auto fb = dg::extract_free_boundaries(sp::profile_field(g, 0.25), d, tol);
        REQUIRE(fb.xi.has_value());
        CHECK(std::abs(*fb.xi - (-0.75 + std::sqrt(0.5625 + 2.0))) <= 3.0 * h);
        CHECK_FALSE(fb.zeta.has_value());
    }
    SUBCASE("t = 9/8")
    {
        const auto fb = dg::extract_free_boundaries(sp::profile_field(g, 1.125), d, tol);
        REQUIRE(fb.xi.has_value());
        REQUIRE(fb.zeta.has_value());
        CHECK(std::abs(*fb.xi - 0.5389) <= 3.0 * h);
        CHECK(std::abs(*fb.zeta - 0.25) <= 3.0 * h);
    }
    SUBCASE("t = 1/2: the open region reaches x = 1")
    {
        const auto fb = dg::extract_free_boundaries(sp::profile_field(g, 0.5), d, tol);
        REQUIRE(fb.xi.has_value());
        CHECK(std::abs(*fb.xi - 1.0) <= 3.0 * h);
    }
    SUBCASE("stabilized profile has no free boundary")
    {
        const auto fb = dg::extract_free_boundaries(d, d, tol);
        CHECK_FALSE(fb.xi.has_value());
        CHECK_FALSE(fb.zeta.has_value());
    }
    SUBCASE("lattice of times")
    {
        for (double t : {0.1, 0.25, 0.6, 1.1}) {
            const auto fb = dg::extract_free_boundaries(sp::profile_field(g, t), d, tol);
            REQUIRE(fb.xi.has_value());
            CHECK(std::abs(*fb.xi - sp::xi(t)) <= 3.0 * h);
        }
        for (double t : {1.05, 1.2}) {
            const auto fb = dg::extract_free_boundaries(sp::profile_field(g, t), d, tol);
            REQUIRE(fb.zeta.has_value());
            CHECK(std::abs(*fb.zeta - sp::zeta(t)) <= 3.0 * h);
        }
    }
}

TEST_CASE("free-boundary trace marks absent values with NaN")
{
    const Grid1D g(0.0, 1.0, 200);
    const auto trace = dg::trace_free_boundaries(oracle_trajectory(g, {0.5, 1.1, 2.0}), sp::distance_field(g), 1e-9);
    REQUIRE(trace.times.size() == 3);
    CHECK(std::isnan(trace.zeta_numeric[0]));
    CHECK_FALSE(std::isnan(trace.zeta_numeric[1]));
    CHECK(std::isnan(trace.xi_numeric[2]));
}

TEST_CASE("stabilization detection")
{
    const Grid1D g(0.0, 1.0, 200);
    const ScalarField d = sp::distance_field(g);

    Trajectory flat;
    for (double t : {0.0, 0.5, 1.0}) {
        flat.times.push_back(t);
        flat.snapshots.push_back(d);
    }
    CHECK(dg::detect_stabilization(flat, d, 1e-12).t_star_numeric == 0.0);

    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(0.05 * k);
    const Trajectory exact = oracle_trajectory(g, times);
    const auto r = dg::detect_stabilization(exact, d, 1e-9);
    CHECK(r.t_star_numeric == doctest::Approx(1.25));
    CHECK(r.target_error_at_end == 0.0);
    CHECK(r.monotone_violation_max <= 1e-12);

    // larger tolerance never gives a later time
    double prev = std::numeric_limits<double>::infinity();
    for (double tol : {1e-9, 1e-3, 1e-2, 0.05, 0.1, 0.3, 1.0}) {
        const double t_star = dg::detect_stabilization(exact, d, tol).t_star_numeric;
        CHECK(t_star <= prev);
        prev = t_star;
    }

    Trajectory never = exact;
    never.snapshots.back() = ScalarField::zeros(g);
    CHECK(std::isinf(dg::detect_stabilization(never, d, 1e-3).t_star_numeric));
}

TEST_CASE("rescaling into a constraint set")
{
    const Grid1D g(0.0, 1.0, 100);
    const ScalarField d = sp::distance_field(g);

    CHECK(dg::rescale_into_constraint(d, 0.0, 0.7) == d);

    const ScalarField half = dg::rescale_into_constraint(d, 0.5, 0.5);
    CHECK(max_norm(half - 0.5 * d) <= 1e-15);
    CHECK(max_gradient(half) == doctest::Approx(0.5));

    CHECK_THROWS_AS(dg::rescale_into_constraint(d, 0.1, 0.0), Error);
    CHECK_THROWS_AS(dg::rescale_into_constraint(d, -0.1, 1.0), Error);
}

TEST_CASE("rescaling bounds on random fields")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Grid1D g(0.0, 1.0, 64);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> v(g.node_count(), 0.0);
        for (std::size_t i = 1; i < v.size(); ++i) v[i] = v[i - 1] + (2.0 * u(rng) - 1.0) * g.h();
        const ScalarField field(g, v);
        const double alpha = u(rng);
        const double m = 0.1 + 0.9 * u(rng);
        const ScalarField r = dg::rescale_into_constraint(field, alpha, m);
        CHECK(max_gradient(r) <= m / (m + alpha) * max_gradient(field) + 1e-12);
        CHECK(max_gradient(field - r) <= max_gradient(field) / m * alpha + 1e-12);
    }
}

TEST_CASE("data distance and stability study")
{
    const ProblemData base = sp::make_problem(100);
    SolverParams p;
    p.t_end = 1.0;

    CHECK(dg::data_distance(base, base, p) == 0.0);
    const auto same = dg::stability_study(base, base, p);
    CHECK(same.sup_l2_sq_diff == 0.0);
    CHECK(same.data_distance == 0.0);

    // a constant source shift eta contributes eta * |Omega| * T
    CHECK(dg::data_distance(base, sp::make_problem(100, 0.1), p) == doctest::Approx(0.1).epsilon(1e-9));

    const auto r1 = dg::stability_study(base, sp::make_problem(100, 0.1), p);
    const auto r2 = dg::stability_study(base, sp::make_problem(100, 0.05), p);
    CHECK(r1.sup_l2_sq_diff > 0.0);
    CHECK(r2.sup_l2_sq_diff / r2.data_distance <= 3.0 * r1.sup_l2_sq_diff / r1.data_distance);

    CHECK_THROWS_AS(dg::stability_study(base, sp::make_problem(50), p), Error);
}

TEST_CASE("initial-state perturbation does not grow")
{
    const ProblemData base = sp::make_problem(200);
    std::vector<double> v(base.u0().values().begin(), base.u0().values().end());
    const double amplitude = 1e-3 / std::sqrt(0.15);  // L2 norm of the bump is 1e-3
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = base.grid().node(i);
        if (x > 0.1 && x < 0.5) v[i] += amplitude * std::pow(std::sin(M_PI * (x - 0.1) / 0.4), 2);
    }
    const ProblemData bumped = base.with_initial_state(ScalarField(base.grid(), v));
    SolverParams p;
    p.t_end = 1.0;
    const auto r = dg::stability_study(base, bumped, p);
    CHECK(r.data_distance == doctest::Approx(1e-6).epsilon(1e-3));
    CHECK(r.sup_l2_sq_diff <= 1.05 * 1.05 * r.data_distance);
}

TEST_CASE("asymptotic study")
{
    const Grid1D g(0.0, 1.0, 100);
    SolverParams p;
    p.dt = 5e-3;
    const ProblemData limit(zero, one, [](double, double) { return 1.0; }, one, ScalarField::zeros(g), 1.0, 1.0);
    const ScalarField u_inf = solve_stationary(limit, p, 1e-10).solution;

    SUBCASE("starting on the limit stays there")
    {
        // a small source keeps the boundary layers below unit slope, so the limit is a feasible initial state
        const ProblemData quiet(zero, one, [](double, double) { return 0.02; }, one, ScalarField::zeros(g), 1.0, 1.0);
        const ScalarField rest = solve_stationary(quiet, p, 1e-10).solution;
        p.t_end = 2.0;
        const auto dist = dg::asymptotic_study(quiet.with_initial_state(rest), p, rest, std::vector<double>{1.0, 2.0});
        for (double v : dist) CHECK(v <= 1e-8);
    }
    SUBCASE("decaying source")
    {
        p.t_end = 20.0;
        const ProblemData evolving(zero, one, [](double, double t) { return 1.0 + std::exp(-t); }, one,
                                   ScalarField::zeros(g), 1.0, 1.0, 20.0);
        const auto dist = dg::asymptotic_study(evolving, p, u_inf, std::vector<double>{2.0, 5.0, 10.0, 20.0});
        for (std::size_t k = 1; k < dist.size(); ++k) CHECK(dist[k] < dist[k - 1]);
        CHECK(dist.back() <= 1e-3);
    }
}
