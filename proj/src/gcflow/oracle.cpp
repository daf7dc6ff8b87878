#include "gcflow/oracle.hpp"

#include <cmath>
#include <sstream>

namespace gcflow::sandpile {
namespace {

void domain_check(bool ok, const char* fn, double value)
{
    if (!ok) {
        std::ostringstream os;
        os << "sandpile::" << fn << ": argument " << value << " outside its domain";
        fail(ErrorCode::DomainError, os.str());
    }
}

// Branches of the closed-form profile, in the order they are listed; ties at
// interfaces go to the first match.
enum class Branch { EarlyParabola, EarlyLowerLine, UpperLine, LeftUpperLine, LateParabola, LateUpperLine, Stable };

Branch branch_of(double x, double t)
{
    if (t > kStabilizationTime) return Branch::Stable;
    const double xi_t = xi(t);
    if (t <= 1.0) {
        if (x <= xi_t) return Branch::EarlyParabola;
        return t <= 0.5 ? Branch::EarlyLowerLine : Branch::UpperLine;
    }
    const double zeta_t = zeta(t);
    if (x <= zeta_t) return Branch::LeftUpperLine;
    if (x <= xi_t) return Branch::LateParabola;
    // The listed formula prints x - 1 here; 1 - x is the value that is
    // continuous at xi(t) and equals (-d) v ((tx - x^2/2) ^ d).
    return Branch::LateUpperLine;
}

double parabola(double x, double t) { return t * x - 0.5 * x * x; }

}  // namespace

double initial_kink() { return std::sqrt(3.0) - 1.0; }

double xi(double t)
{
    domain_check(t >= 0.0 && t <= kStabilizationTime, "xi", t);
    if (t <= 0.5) return t - 1.0 + std::sqrt((1.0 - t) * (1.0 - t) + 2.0);
    return t + 1.0 - std::sqrt((t + 1.0) * (t + 1.0) - 2.0);
}

double zeta(double t)
{
    domain_check(t >= 1.0 && t <= kStabilizationTime, "zeta", t);
    return 2.0 * (t - 1.0);
}

double distance(double x)
{
    domain_check(x >= 0.0 && x <= 1.0, "distance", x);
    return 0.5 - std::abs(x - 0.5);
}

double initial_profile(double x)
{
    domain_check(x >= 0.0 && x <= 1.0, "initial_profile", x);
    return x <= initial_kink() ? -0.5 * x * x : x - 1.0;
}

double profile(double x, double t)
{
    domain_check(x >= 0.0 && x <= 1.0, "profile", x);
    domain_check(t >= 0.0, "profile", t);
    switch (branch_of(x, t)) {
    case Branch::EarlyParabola:
    case Branch::LateParabola: return parabola(x, t);
    case Branch::EarlyLowerLine: return x - 1.0;
    case Branch::UpperLine:
    case Branch::LateUpperLine: return 1.0 - x;
    case Branch::LeftUpperLine: return x;
    case Branch::Stable: return distance(x);
    }
    return distance(x);
}

Label coincidence_label(double x, double t)
{
    domain_check(x > 0.0 && x < 1.0, "coincidence_label", x);
    domain_check(t >= 0.0, "coincidence_label", t);
    switch (branch_of(x, t)) {
    case Branch::EarlyLowerLine: return Label::Lower;
    case Branch::UpperLine:
    case Branch::LateUpperLine:
    case Branch::LeftUpperLine:
    case Branch::Stable: return Label::Upper;
    case Branch::EarlyParabola:
    case Branch::LateParabola: {
        const double z = parabola(x, t);
        const double d = distance(x);
        if (z >= d) return Label::Upper;
        if (z <= -d) return Label::Lower;
        return Label::Open;
    }
    }
    return Label::Open;
}

ProblemData make_problem(int n_cells, double f_shift)
{
    const Grid1D grid(0.0, 1.0, n_cells);
    return ProblemData([](double, double) { return 1.0; }, [](double, double) { return 0.0; },
                       [f_shift](double, double t) { return t + f_shift; }, [](double, double) { return 1.0; },
                       ScalarField::sample(grid, initial_profile), 1.0, 0.0, 2.0);
}

ScalarField distance_field(const Grid1D& grid)
{
    require(grid.x_left() == 0.0 && grid.x_right() == 1.0, "sandpile grids live on (0, 1)");
    return ScalarField::sample(grid, distance);
}

ScalarField profile_field(const Grid1D& grid, double t)
{
    require(grid.x_left() == 0.0 && grid.x_right() == 1.0, "sandpile grids live on (0, 1)");
    return ScalarField::sample(grid, [t](double x) { return profile(x, t); });
}

}  // namespace gcflow::sandpile
