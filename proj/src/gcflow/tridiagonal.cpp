#include "gcflow/tridiagonal.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gcflow/error.hpp"

namespace gcflow {

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs)
{
    const std::size_t n = diag.size();
    require(n >= 1 && lower.size() == n && upper.size() == n && rhs.size() == n,
            "solve_tridiagonal: band and rhs sizes must match");

    constexpr double kTinyPivot = 1e-300;
    std::vector<double> c_prime(n);

    auto check_pivot = [](double p, std::size_t row) {
        if (!std::isfinite(p) || std::abs(p) < kTinyPivot)
            fail(ErrorCode::LinearSolveFailure, "tridiagonal pivot underflow at row " + std::to_string(row));
    };

    check_pivot(diag[0], 0);
    c_prime[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double pivot = diag[i] - lower[i] * c_prime[i - 1];
        check_pivot(pivot, i);
        c_prime[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_prime[i] * rhs[i + 1];

    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(rhs[i])) fail(ErrorCode::LinearSolveFailure, "tridiagonal solve produced non-finite values");
}

}  // namespace gcflow
