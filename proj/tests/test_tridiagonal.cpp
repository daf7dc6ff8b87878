#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "gcflow/error.hpp"
#include "gcflow/tridiagonal.hpp"

using gcflow::solve_tridiagonal;

namespace {

// Dense Gaussian elimination with partial pivoting, used as the reference.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= m * a[k][j];
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace

TEST_CASE("matches dense elimination on diagonally dominant systems")
{
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 40);
        std::vector<double> lower(n), diag(n), upper(n), rhs(n);
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            lower[i] = i > 0 ? u(rng) : 0.0;
            upper[i] = i + 1 < n ? u(rng) : 0.0;
            diag[i] = std::abs(lower[i]) + std::abs(upper[i]) + 0.5 + std::abs(u(rng));
            rhs[i] = u(rng);
            dense[i][i] = diag[i];
            if (i > 0) dense[i][i - 1] = lower[i];
            if (i + 1 < n) dense[i][i + 1] = upper[i];
        }
        const auto expected = dense_solve(dense, rhs);
        solve_tridiagonal(lower, diag, upper, rhs);
        for (std::size_t i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(expected[i]).epsilon(1e-10));
    }
}

TEST_CASE("second-difference system with known solution")
{
    // -x[i-1] + 2x[i] - x[i+1] = 0 with x[-1] = 0, x[n] = n + 1 folded into the rhs gives x[i] = i + 1.
    const std::size_t n = 50;
    std::vector<double> lower(n, -1.0), diag(n, 2.0), upper(n, -1.0), rhs(n, 0.0);
    rhs.back() = static_cast<double>(n + 1);
    solve_tridiagonal(lower, diag, upper, rhs);
    for (std::size_t i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(static_cast<double>(i + 1)));
}

TEST_CASE("singular pivots are reported")
{
    std::vector<double> lower{0.0, 1.0}, diag{0.0, 1.0}, upper{1.0, 0.0}, rhs{1.0, 1.0};
    try {
        solve_tridiagonal(lower, diag, upper, rhs);
        FAIL("expected a linear solve failure");
    } catch (const gcflow::Error& e) {
        CHECK(e.code() == gcflow::ErrorCode::LinearSolveFailure);
    }
}

TEST_CASE("size mismatch is an argument error")
{
    std::vector<double> a(3), b(4), c(3), r(3);
    CHECK_THROWS_AS(solve_tridiagonal(a, b, c, r), gcflow::Error);
}
