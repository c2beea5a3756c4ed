#pragma once

#include <vector>

#include <Eigen/Dense>

namespace wonham {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Absolute "is zero" threshold for every rank and residual decision in the
// library. Scaled by the norm of the matrix involved, never below itself.
inline constexpr double kZeroTol = 1e-10;

double scaled_tol(const Matrix& m, double base = kZeroTol);

struct OrthonormalSpan {
  Matrix basis;                        // d x k, orthonormal columns
  std::vector<double> singular_values; // full spectrum of the input, descending
};

// Orthonormal basis of the column span of `columns`. A direction is kept when
// its singular value is at least tol * max(1, sigma_max).
OrthonormalSpan orthonormal_span(const Matrix& columns, double tol = kZeroTol);

// Norm of v minus its orthogonal projection onto span(basis).
double projection_residual(const Matrix& basis, const Vector& v);

// Right singular vectors of m whose singular value is below the scaled tolerance.
OrthonormalSpan kernel(const Matrix& m, double tol = kZeroTol);

}  // namespace wonham
