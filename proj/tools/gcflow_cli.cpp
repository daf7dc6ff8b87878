// gcflow command-line driver. Runs one study through the C API and writes
// CSV tables plus manifest.json into the output directory.
//
//   gcflow <command> [--config <file>] --out <dir> [key overrides]
//
// Exit codes: 0 all acceptance bounds hold, 1 some bound failed,
// 2 configuration error, 3 solver error.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcflow/gcflow.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAcceptance = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

constexpr double kStabilizationTime = 1.25;
// Stabilization window [1.20, 1.35] as centre and half-width.
constexpr double kStarCentre = 1.275;
constexpr double kStarHalfWidth = 0.075;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(gcf_status status, const char* what)
{
    if (status != GCF_OK)
        throw SolverError(std::string(what) + ": " + gcf_status_string(status) + " (" + gcf_last_error_message() + ")");
}

struct ProblemDeleter {
    void operator()(gcf_problem* p) const { gcf_problem_destroy(p); }
};
struct TrajectoryDeleter {
    void operator()(gcf_trajectory* t) const { gcf_trajectory_destroy(t); }
};
using Problem = std::unique_ptr<gcf_problem, ProblemDeleter>;
using Trajectory = std::unique_ptr<gcf_trajectory, TrajectoryDeleter>;

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

class Csv {
public:
    Csv(const fs::path& path, std::initializer_list<const char*> header) : out_(path)
    {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        bool first = true;
        for (const char* h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }

    void row(std::initializer_list<double> values)
    {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << num(v);
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// Everything the config file or the command line can set. A value counts as
// set when `app.count("--key")` is nonzero.
struct Options {
    std::string command;
    std::string out_dir;
    std::vector<double> domain{0.0, 1.0};
    int n_cells = 400;
    double epsilon = 0.0;
    double delta = 0.0;
    double dt = 0.0;
    double t_end = 2.0;
    double picard_tol = 0.0;
    int picard_max = 0;
    std::vector<double> snapshot_times;

    // sandpile
    double boundary_spacing = 0.01;
    double boundary_tol = 0.0;
    double error_bound = 0.0;
    double violation_bound = 0.02;
    double stabilization_tol = 0.02;

    // equivalence
    double gap_bound = 0.05;
    double gap_ratio_bound = 0.7;

    // stationary
    double b = 0.0;
    double c = 1.0;
    double f = 2.0;
    double g = 1.0;
    double steady_tol = 1e-6;
    double t_max = 0.0;
    std::string reference = "distance";

    // converge
    std::vector<int> n_cells_ladder{100, 200, 400};
    double error_ratio_bound = 0.9;

    // stability
    std::vector<double> eta_ladder{0.2, 0.1, 0.05};
    double spread_bound = 5.0;
};

const std::set<std::string> kCommonKeys{"domain", "n_cells", "epsilon", "delta", "dt", "t_end",
                                        "picard_tol", "picard_max", "snapshot_times"};

const std::map<std::string, std::set<std::string>> kCommandKeys{
    {"sandpile", {"boundary_spacing", "boundary_tol", "error_bound", "violation_bound", "stabilization_tol"}},
    {"equivalence", {"gap_bound", "gap_ratio_bound"}},
    {"stationary", {"b", "c", "f", "g", "steady_tol", "t_max", "reference", "error_bound"}},
    {"converge", {"n_cells_ladder", "error_ratio_bound"}},
    {"stability", {"eta_ladder", "spread_bound"}},
};

struct Acceptance {
    std::string name;
    double measured;
    double bound;
    bool pass() const { return measured <= bound; }
};

struct Report {
    gcf_params params{};
    int n_cells = 0;
    std::vector<double> domain{0.0, 1.0};
    std::vector<Acceptance> acceptance;
    std::string error;

    void accept(std::string name, double measured, double bound)
    {
        acceptance.push_back(Acceptance{std::move(name), measured, bound});
    }
};

void write_manifest(const fs::path& dir, const Options& opt, const Report& rep, double wall_time)
{
    json acc = json::array();
    for (const auto& a : rep.acceptance) {
        acc.push_back({{"name", a.name},
                       {"measured", std::isfinite(a.measured) ? json(a.measured) : json(num(a.measured))},
                       {"bound", a.bound},
                       {"pass", a.pass()}});
    }
    const double h = (rep.domain[1] - rep.domain[0]) / rep.n_cells;
    json manifest{
        {"command", opt.command},
        {"params",
         {{"epsilon", rep.params.epsilon},
          {"delta", rep.params.delta},
          {"dt", rep.params.dt},
          {"t_end", rep.params.t_end},
          {"picard_tol", rep.params.picard_tol},
          {"picard_max", rep.params.picard_max},
          {"constraint_tol", rep.params.constraint_tol}}},
        {"grid", {{"x_left", rep.domain[0]}, {"x_right", rep.domain[1]}, {"n_cells", rep.n_cells}, {"h", h}}},
        {"wall_time_s", wall_time},
        {"acceptance", acc},
    };
    if (!rep.error.empty()) manifest["error"] = rep.error;
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

// ---- shared helpers ------------------------------------------------------

gcf_params resolve_params(const CLI::App& app, const Options& opt, gcf_params base)
{
    if (app.count("--epsilon")) base.epsilon = opt.epsilon;
    if (app.count("--delta")) base.delta = opt.delta;
    if (app.count("--dt")) base.dt = opt.dt;
    if (app.count("--picard_tol")) base.picard_tol = opt.picard_tol;
    if (app.count("--picard_max")) base.picard_max = opt.picard_max;
    base.t_end = opt.t_end;
    if (opt.t_end > 0.0 && gcf_params_validate(&base) != GCF_OK)
        throw ConfigError(std::string("invalid solver parameters: ") + gcf_last_error_message());
    return base;
}

void require_unit_domain(const Options& opt)
{
    if (opt.domain[0] != 0.0 || opt.domain[1] != 1.0)
        throw ConfigError("the " + opt.command + " study is defined on domain = [0, 1]");
}

std::vector<double> uniform_times(double t_end, double spacing)
{
    std::vector<double> times;
    const long n = std::lround(std::floor(t_end / spacing + 1e-9));
    for (long k = 0; k <= n; ++k) times.push_back(static_cast<double>(k) * spacing);
    return times;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

// Requested snapshot times past t_end are dropped.
std::vector<double> clip_times(const std::vector<double>& times, double t_end)
{
    std::vector<double> kept;
    for (double t : times) {
        if (t < 0.0) throw ConfigError("snapshot_times must be >= 0");
        if (t <= t_end) kept.push_back(t);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

Problem make_sandpile(int n_cells)
{
    gcf_problem* raw = nullptr;
    check(gcf_problem_create_sandpile(n_cells, &raw), "sandpile problem");
    return Problem(raw);
}

struct ConstantData {
    double b, c, f, g;
};

double const_b(double, double, void* u) { return static_cast<ConstantData*>(u)->b; }
double const_c(double, double, void* u) { return static_cast<ConstantData*>(u)->c; }
double const_f(double, double, void* u) { return static_cast<ConstantData*>(u)->f; }
double const_g(double, double, void* u) { return static_cast<ConstantData*>(u)->g; }

double sandpile_one(double, double, void*) { return 1.0; }
double sandpile_zero(double, double, void*) { return 0.0; }
double sandpile_shifted_f(double, double t, void* u) { return t + *static_cast<const double*>(u); }

// Sandpile data with f = t + eta. `eta` must outlive the problem.
Problem make_shifted_sandpile(int n_cells, const double* eta)
{
    Problem base = make_sandpile(n_cells);
    std::vector<double> u0(gcf_problem_node_count(base.get()));
    check(gcf_problem_initial_state(base.get(), u0.data(), u0.size()), "initial state");
    gcf_problem* raw = nullptr;
    check(gcf_problem_create(0.0, 1.0, n_cells, sandpile_one, sandpile_zero, sandpile_shifted_f, sandpile_one,
                             const_cast<double*>(eta), u0.data(), u0.size(), 1.0, 0.0, 2.0, &raw),
          "perturbed sandpile problem");
    return Problem(raw);
}

Trajectory solve(const gcf_problem* problem, const gcf_params& params, gcf_solver_kind kind,
                 const std::vector<double>& times)
{
    gcf_trajectory* raw = nullptr;
    check(gcf_solve(problem, &params, kind, times.data(), times.size(), &raw), "solve");
    return Trajectory(raw);
}

std::vector<double> snapshot(const gcf_trajectory* traj, std::size_t k)
{
    std::vector<double> values(gcf_trajectory_node_count(traj));
    check(gcf_trajectory_snapshot(traj, k, values.data(), values.size()), "snapshot");
    return values;
}

double time_of(const gcf_trajectory* traj, std::size_t k)
{
    double t = 0.0;
    check(gcf_trajectory_time(traj, k, &t), "snapshot time");
    return t;
}

std::size_t nearest_snapshot(const gcf_trajectory* traj, double t)
{
    std::size_t best = 0;
    const std::size_t n = gcf_trajectory_snapshot_count(traj);
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs(time_of(traj, k) - t) < std::abs(time_of(traj, best) - t)) best = k;
    return best;
}

double oracle_profile(double x, double t)
{
    double v = 0.0;
    check(gcf_sandpile_profile(x, t, &v), "oracle profile");
    return v;
}

double oracle_xi(double t)
{
    double v = NAN;
    if (t <= kStabilizationTime) check(gcf_sandpile_xi(t, &v), "oracle xi");
    return v;
}

double oracle_zeta(double t)
{
    double v = NAN;
    if (t >= 1.0 && t <= kStabilizationTime) check(gcf_sandpile_zeta(t, &v), "oracle zeta");
    return v;
}

std::vector<double> nodes_of(const gcf_problem* problem)
{
    std::vector<double> x(gcf_problem_node_count(problem));
    check(gcf_problem_nodes(problem, x.data(), x.size()), "nodes");
    return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---- commands ------------------------------------------------------------

void run_sandpile(const CLI::App& app, const Options& opt, const fs::path& out, Report& rep)
{
    require_unit_domain(opt);
    rep.n_cells = opt.n_cells;
    rep.params = resolve_params(app, opt, gcf_params_default());
    const double h = 1.0 / opt.n_cells;
    const double label_tol = app.count("--boundary_tol") ? opt.boundary_tol : 0.2 * h;
    if (!(opt.boundary_spacing > 0.0)) throw ConfigError("boundary_spacing must be > 0");

    if (app.count("--snapshot_times") && opt.snapshot_times.empty()) throw ConfigError("empty snapshot_times");
    const std::vector<double> requested =
        clip_times(app.count("--snapshot_times") ? opt.snapshot_times : std::vector<double>{0.0, 0.75, 1.125, 1.25},
                   opt.t_end);
    if (requested.empty()) throw ConfigError("no snapshot_times within [0, t_end]");

    Problem problem = make_sandpile(opt.n_cells);
    const std::vector<double> x = nodes_of(problem.get());

    // Rows of (t, values) in time order, either from a solve or, for t_end = 0, the initial state.
    std::vector<std::pair<double, std::vector<double>>> profiles;
    std::vector<std::pair<double, std::vector<double>>> boundary_rows;
    double worst_violation = 0.0;
    Trajectory traj;
    if (opt.t_end == 0.0) {
        std::vector<double> u0(x.size());
        check(gcf_problem_initial_state(problem.get(), u0.data(), u0.size()), "initial state");
        double slope = 0.0;
        check(gcf_max_gradient(u0.data(), u0.size(), h, &slope), "max gradient");
        worst_violation = std::max(0.0, slope - 1.0);
        profiles.emplace_back(0.0, u0);
        boundary_rows.emplace_back(0.0, u0);
    } else {
        const std::vector<double> times = merged(requested, uniform_times(opt.t_end, opt.boundary_spacing));
        traj = solve(problem.get(), rep.params, GCF_SOLVER_GRADIENT_PENALTY, times);
        std::set<std::size_t> wanted;
        for (double t : requested) wanted.insert(nearest_snapshot(traj.get(), t));
        for (std::size_t k : wanted) profiles.emplace_back(time_of(traj.get(), k), snapshot(traj.get(), k));
        const std::size_t n_snap = gcf_trajectory_snapshot_count(traj.get());
        for (std::size_t k = 0; k < n_snap; ++k)
            boundary_rows.emplace_back(time_of(traj.get(), k), snapshot(traj.get(), k));
        for (std::size_t s = 0; s < gcf_trajectory_step_count(traj.get()); ++s) {
            gcf_step_diagnostics d{};
            check(gcf_trajectory_step_diagnostics(traj.get(), s, &d), "step diagnostics");
            worst_violation = std::max(worst_violation, d.constraint_violation);
        }
    }

    Csv prof(out / "profiles.csv", {"t", "x", "u_numeric", "u_oracle"});
    double worst_error = 0.0;
    for (const auto& [t, u] : profiles) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double exact = oracle_profile(x[i], t);
            worst_error = std::max(worst_error, std::abs(u[i] - exact));
            prof.row({t, x[i], u[i], exact});
        }
    }

    Csv fb(out / "free_boundary.csv", {"t", "xi_numeric", "xi_oracle", "zeta_numeric", "zeta_oracle"});
    for (const auto& [t, u] : boundary_rows) {
        gcf_free_boundaries b{};
        check(gcf_free_boundaries_of(problem.get(), u.data(), u.size(), label_tol, &b), "free boundaries");
        fb.row({t, b.has_xi ? b.xi : NAN, oracle_xi(t), b.has_zeta ? b.zeta : NAN, oracle_zeta(t)});
    }

    rep.accept("profile_linf_error", worst_error, app.count("--error_bound") ? opt.error_bound : 0.05);
    rep.accept("constraint_violation", worst_violation, opt.violation_bound);
    if (traj && opt.t_end >= kStarCentre + kStarHalfWidth) {
        std::vector<double> d(x.size());
        check(gcf_problem_distance(problem.get(), d.data(), d.size()), "distance");
        gcf_stabilization_report r{};
        check(gcf_detect_stabilization(traj.get(), d.data(), d.size(), opt.stabilization_tol, &r), "stabilization");
        rep.accept("t_star_offset", std::abs(r.t_star - kStarCentre), kStarHalfWidth);
    }
}

double sup_gap_series(const gcf_trajectory* a, const gcf_trajectory* b, std::vector<double>& per_snapshot)
{
    double sup = 0.0;
    for (std::size_t k = 0; k < gcf_trajectory_snapshot_count(a); ++k) {
        per_snapshot.push_back(max_abs_diff(snapshot(a, k), snapshot(b, k)));
        sup = std::max(sup, per_snapshot.back());
    }
    return sup;
}

void run_equivalence(const CLI::App& app, const Options& opt, const fs::path& out, Report& rep)
{
    require_unit_domain(opt);
    if (opt.t_end <= 0.0) throw ConfigError("equivalence needs t_end > 0");
    if (opt.n_cells % 2 != 0) throw ConfigError("equivalence compares n_cells with n_cells / 2; n_cells must be even");
    if (app.count("--snapshot_times") && opt.snapshot_times.empty()) throw ConfigError("empty snapshot_times");
    const std::vector<double> times =
        app.count("--snapshot_times") ? clip_times(opt.snapshot_times, opt.t_end) : uniform_times(opt.t_end, 0.05);
    if (times.empty()) throw ConfigError("no snapshot_times within [0, t_end]");

    rep.n_cells = opt.n_cells;
    const std::array<int, 2> levels{opt.n_cells / 2, opt.n_cells};
    std::array<gcf_params, 2> params{};
    for (std::size_t i = 0; i < levels.size(); ++i) {
        params[i] = gcf_params_coupled(1.0 / levels[i], opt.t_end);
        // explicit keys pin the finest level only
        if (i == 1) params[i] = resolve_params(app, opt, params[i]);
    }
    rep.params = params[1];

    auto run_level = [&](std::size_t i) {
        Problem problem = make_sandpile(levels[i]);
        auto obstacle = std::async(std::launch::async,
                                   [&] { return solve(problem.get(), params[i], GCF_SOLVER_OBSTACLE, times); });
        Trajectory penalty = solve(problem.get(), params[i], GCF_SOLVER_GRADIENT_PENALTY, times);
        Trajectory obs = obstacle.get();
        std::vector<double> gaps;
        const double sup = sup_gap_series(penalty.get(), obs.get(), gaps);
        std::vector<double> recorded;
        for (std::size_t k = 0; k < gaps.size(); ++k) recorded.push_back(time_of(penalty.get(), k));
        return std::tuple{sup, gaps, recorded};
    };
    auto coarse_future = std::async(std::launch::async, run_level, 0);
    const auto fine = run_level(1);
    const auto coarse = coarse_future.get();

    Csv csv(out / "equivalence.csv", {"n_cells", "t", "gap"});
    for (const auto* level : {&coarse, &fine}) {
        const double n = level == &coarse ? levels[0] : levels[1];
        const auto& [sup, gaps, recorded] = *level;
        for (std::size_t k = 0; k < gaps.size(); ++k) csv.row({n, recorded[k], gaps[k]});
    }
    rep.accept("sup_gap_coarse", std::get<0>(coarse), opt.gap_bound);
    rep.accept("gap_ratio_fine_over_coarse", std::get<0>(fine) / std::get<0>(coarse), opt.gap_ratio_bound);
}

void run_stationary(const CLI::App& app, const Options& opt, const fs::path& out, Report& rep)
{
    if (opt.reference != "distance" && opt.reference != "none")
        throw ConfigError("reference must be 'distance' or 'none'");
    if (!(opt.g > 0.0)) throw ConfigError("stationary needs g > 0");
    if (!(opt.c > 0.0)) throw ConfigError("stationary needs c > 0 for coercivity");
    rep.n_cells = opt.n_cells;
    rep.domain = opt.domain;
    gcf_params defaults = gcf_params_default();
    defaults.dt = 0.01;
    Options o = opt;
    o.t_end = 1.0;  // unused by the stationary solver
    rep.params = resolve_params(app, o, defaults);

    ConstantData data{opt.b, opt.c, opt.f, opt.g};
    const std::vector<double> u0(static_cast<std::size_t>(opt.n_cells) + 1, 0.0);
    gcf_problem* raw = nullptr;
    // with b constant, c - b'/2 = c
    check(gcf_problem_create(opt.domain[0], opt.domain[1], opt.n_cells, const_b, const_c, const_f, const_g, &data,
                             u0.data(), u0.size(), opt.g, opt.c, 1.0, &raw),
          "stationary problem");
    Problem problem(raw);

    std::vector<double> u(u0.size()), d(u0.size());
    gcf_stationary_info info{};
    check(gcf_solve_stationary(problem.get(), &rep.params, opt.steady_tol, opt.t_max, u.data(), u.size(), &info),
          "stationary solve");
    check(gcf_problem_distance(problem.get(), d.data(), d.size()), "distance");
    const std::vector<double> x = nodes_of(problem.get());

    Csv csv(out / "stationary.csv", {"x", "u", "d"});
    for (std::size_t i = 0; i < x.size(); ++i) csv.row({x[i], u[i], d[i]});

    rep.accept("steady_residual", info.steady_residual, opt.steady_tol);
    if (opt.reference == "distance") {
        const double h = (opt.domain[1] - opt.domain[0]) / opt.n_cells;
        rep.accept("linf_error_vs_distance", max_abs_diff(u, d),
                   app.count("--error_bound") ? opt.error_bound : 2.0 * h + 0.02);
    }
}

void run_converge(const CLI::App& app, const Options& opt, const fs::path& out, Report& rep)
{
    require_unit_domain(opt);
    for (const char* key : {"--epsilon", "--delta", "--dt", "--n_cells"})
        if (app.count(key))
            throw ConfigError(std::string("converge derives ") + (key + 2) + " from n_cells_ladder; remove it");
    if (opt.n_cells_ladder.empty()) throw ConfigError("empty n_cells_ladder");
    if (opt.t_end <= 0.0) throw ConfigError("converge needs t_end > 0");
    if (app.count("--snapshot_times") && opt.snapshot_times.empty()) throw ConfigError("empty snapshot_times");
    const std::vector<double> times = clip_times(
        app.count("--snapshot_times") ? opt.snapshot_times : std::vector<double>{0.0, 0.75, 1.125, 1.25}, opt.t_end);
    if (times.empty()) throw ConfigError("no snapshot_times within [0, t_end]");

    struct Level {
        gcf_params params;
        double linf = 0.0;
        double l2 = 0.0;
    };
    std::vector<std::future<Level>> runs;
    for (int n : opt.n_cells_ladder) {
        if (n < 4) throw ConfigError("n_cells_ladder entries must be >= 4");
        runs.push_back(std::async(std::launch::async, [n, &opt, &app, &times] {
            Level level{gcf_params_coupled(1.0 / n, opt.t_end)};
            if (app.count("--picard_tol")) level.params.picard_tol = opt.picard_tol;
            if (app.count("--picard_max")) level.params.picard_max = opt.picard_max;
            Problem problem = make_sandpile(n);
            Trajectory traj = solve(problem.get(), level.params, GCF_SOLVER_GRADIENT_PENALTY, times);
            const std::size_t k = gcf_trajectory_snapshot_count(traj.get());
            std::vector<double> linf(k), l2(k);
            check(gcf_sandpile_errors(traj.get(), linf.data(), l2.data(), k), "sandpile errors");
            level.linf = *std::max_element(linf.begin(), linf.end());
            level.l2 = *std::max_element(l2.begin(), l2.end());
            return level;
        }));
    }

    Csv csv(out / "errors.csv", {"n_cells", "h", "epsilon", "delta", "dt", "linf_error", "l2_error"});
    std::vector<Level> levels;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        levels.push_back(runs[i].get());
        const Level& l = levels.back();
        const int n = opt.n_cells_ladder[i];
        csv.row({static_cast<double>(n), 1.0 / n, l.params.epsilon, l.params.delta, l.params.dt, l.linf, l.l2});
    }
    rep.n_cells = opt.n_cells_ladder.back();
    rep.params = levels.back().params;
    if (levels.size() >= 2) {
        double worst_ratio = 0.0;
        for (std::size_t i = 1; i < levels.size(); ++i)
            worst_ratio = std::max(worst_ratio, levels[i].linf / levels[i - 1].linf);
        rep.accept("max_error_ratio", worst_ratio, opt.error_ratio_bound);
    }
}

void run_stability(const CLI::App& app, const Options& opt, const fs::path& out, Report& rep)
{
    require_unit_domain(opt);
    if (opt.eta_ladder.empty()) throw ConfigError("empty eta_ladder");
    if (opt.t_end <= 0.0) throw ConfigError("stability needs t_end > 0");
    for (double eta : opt.eta_ladder)
        if (!(eta > 0.0)) throw ConfigError("eta_ladder entries must be > 0");
    rep.n_cells = opt.n_cells;
    rep.params = resolve_params(app, opt, gcf_params_default());

    struct Member {
        double sup_l2_sq_diff = 0.0;
        double data_distance = 0.0;
    };
    std::vector<std::future<Member>> runs;
    for (const double& eta : opt.eta_ladder) {
        runs.push_back(std::async(std::launch::async, [&] {
            Problem base = make_sandpile(opt.n_cells);
            Problem perturbed = make_shifted_sandpile(opt.n_cells, &eta);
            Member m;
            check(gcf_stability_study(base.get(), perturbed.get(), &rep.params, &m.sup_l2_sq_diff, &m.data_distance),
                  "stability study");
            return m;
        }));
    }

    Csv csv(out / "stability.csv", {"eta", "sup_l2_sq_diff", "data_distance", "ratio"});
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const Member m = runs[i].get();
        const double ratio = m.sup_l2_sq_diff / m.data_distance;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        csv.row({opt.eta_ladder[i], m.sup_l2_sq_diff, m.data_distance, ratio});
    }
    rep.accept("ratio_spread", hi / lo, opt.spread_bound);
}

// CLI11 turns an empty list ("key = []" or a bare flag) into one default
// element; restore the empty list so the commands can reject it.
template <class T>
void restore_empty_list(const CLI::App& app, const char* name, std::vector<T>& values)
{
    const CLI::Option* o = app.get_option(name);
    if (o->count() == 1 && o->results().size() == 1 && o->results().front().empty()) values.clear();
}

void validate_keys(const CLI::App& app, const Options& opt)
{
    const auto& allowed = kCommandKeys.at(opt.command);
    for (const CLI::Option* o : app.get_options()) {
        const std::string name = o->get_single_name();
        if (o->count() == 0 || name == "config" || name == "out" || name == "command" || name == "help") continue;
        if (!kCommonKeys.count(name) && !allowed.count(name))
            throw ConfigError("key '" + name + "' does not apply to the " + opt.command + " command");
    }
    if (opt.domain.size() != 2 || !(opt.domain[0] < opt.domain[1])) throw ConfigError("domain must be [a, b] with a < b");
    if (opt.n_cells < 4) throw ConfigError("n_cells must be >= 4");
    if (opt.t_end < 0.0) throw ConfigError("t_end must be >= 0");
}

}  // namespace

int main(int argc, char** argv)
{
    Options opt;
    CLI::App app{"Gradient-constrained transport solver studies"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "flat key = value configuration file");

    std::vector<std::string> commands;
    for (const auto& [name, keys] : kCommandKeys) commands.push_back(name);
    app.add_option("command", opt.command, "study to run")->required()->check(CLI::IsMember(commands));
    app.add_option("--out", opt.out_dir, "output directory")->required();

    app.add_option("--domain", opt.domain)->expected(2);
    app.add_option("--n_cells", opt.n_cells);
    app.add_option("--epsilon", opt.epsilon);
    app.add_option("--delta", opt.delta);
    app.add_option("--dt", opt.dt);
    app.add_option("--t_end", opt.t_end);
    app.add_option("--picard_tol", opt.picard_tol);
    app.add_option("--picard_max", opt.picard_max);
    app.add_option("--snapshot_times", opt.snapshot_times)->expected(0, CLI::detail::expected_max_vector_size);

    app.add_option("--boundary_spacing", opt.boundary_spacing);
    app.add_option("--boundary_tol", opt.boundary_tol);
    app.add_option("--error_bound", opt.error_bound);
    app.add_option("--violation_bound", opt.violation_bound);
    app.add_option("--stabilization_tol", opt.stabilization_tol);
    app.add_option("--gap_bound", opt.gap_bound);
    app.add_option("--gap_ratio_bound", opt.gap_ratio_bound);
    app.add_option("--b", opt.b);
    app.add_option("--c", opt.c);
    app.add_option("--f", opt.f);
    app.add_option("--g", opt.g);
    app.add_option("--steady_tol", opt.steady_tol);
    app.add_option("--t_max", opt.t_max);
    app.add_option("--reference", opt.reference);
    app.add_option("--n_cells_ladder", opt.n_cells_ladder)->expected(0, CLI::detail::expected_max_vector_size);
    app.add_option("--error_ratio_bound", opt.error_ratio_bound);
    app.add_option("--eta_ladder", opt.eta_ladder)->expected(0, CLI::detail::expected_max_vector_size);
    app.add_option("--spread_bound", opt.spread_bound);

    try {
        app.parse(argc, argv);
        restore_empty_list(app, "--snapshot_times", opt.snapshot_times);
        restore_empty_list(app, "--n_cells_ladder", opt.n_cells_ladder);
        restore_empty_list(app, "--eta_ladder", opt.eta_ladder);
        validate_keys(app, opt);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    const fs::path out(opt.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::cerr << "config error: cannot create " << out << ": " << ec.message() << '\n';
        return kExitConfig;
    }

    Report rep;
    rep.n_cells = opt.n_cells;
    rep.domain = opt.domain;
    rep.params = gcf_params_default();
    rep.params.t_end = opt.t_end;

    const auto start = std::chrono::steady_clock::now();
    int code = kExitPass;
    try {
        if (opt.command == "sandpile") run_sandpile(app, opt, out, rep);
        else if (opt.command == "equivalence") run_equivalence(app, opt, out, rep);
        else if (opt.command == "stationary") run_stationary(app, opt, out, rep);
        else if (opt.command == "converge") run_converge(app, opt, out, rep);
        else run_stability(app, opt, out, rep);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        rep.error = std::string("config error: ") + e.what();
        code = kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        rep.error = std::string("solver error: ") + e.what();
        code = kExitSolver;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out, opt, rep, wall);

    for (const auto& a : rep.acceptance) {
        std::cout << (a.pass() ? "PASS " : "FAIL ") << a.name << ": " << num(a.measured) << " <= " << num(a.bound)
                  << '\n';
        if (!a.pass() && code == kExitPass) code = kExitAcceptance;
    }
    return code;
}
