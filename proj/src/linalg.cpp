#include "wonham/linalg.hpp"

#include <algorithm>

namespace wonham {

double scaled_tol(const Matrix& m, double base) {
  const double norm = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  return base * std::max(1.0, norm);
}

OrthonormalSpan orthonormal_span(const Matrix& columns, double tol) {
  OrthonormalSpan out;
  if (columns.cols() == 0) {
    out.basis = Matrix(columns.rows(), 0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  out.singular_values.assign(s.data(), s.data() + s.size());
  const double threshold = tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) >= threshold) ++rank;
  out.basis = svd.matrixU().leftCols(rank);
  return out;
}

double projection_residual(const Matrix& basis, const Vector& v) {
  if (basis.cols() == 0) return v.norm();
  return (v - basis * (basis.transpose() * v)).norm();
}

OrthonormalSpan kernel(const Matrix& m, double tol) {
  OrthonormalSpan out;
  const Eigen::Index n = m.cols();
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  out.singular_values.assign(s.data(), s.data() + s.size());
  const double threshold = scaled_tol(m, tol);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > threshold) ++rank;
  out.basis = svd.matrixV().rightCols(n - rank);
  return out;
}

}  // namespace wonham
