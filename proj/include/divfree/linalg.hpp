#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace divfree {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

inline double norm2(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r += x * x;
  return std::sqrt(r);
}

inline Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

/// Minkowski matrix diag(-c^2, 1, ..., 1) of size d.
inline Matrix minkowski(int d, double c = 1.0) {
  Matrix m = Matrix::Identity(d, d);
  m(0, 0) = -c * c;
  return m;
}

}  // namespace divfree
