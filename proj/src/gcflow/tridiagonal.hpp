#pragma once

#include <span>

namespace gcflow {

/// Thomas algorithm. Row i reads lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i];
/// lower[0] and upper[n-1] are ignored. The solution overwrites rhs.
///
/// Throws ErrorCode::LinearSolveFailure when a pivot underflows or turns
/// non-finite. No pivoting: intended for the diagonally dominant systems the
/// implicit steps produce.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs);

}  // namespace gcflow
