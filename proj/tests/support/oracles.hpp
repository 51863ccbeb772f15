#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// QR path of the library: hat matrices come from explicit normal-equation
// inverses and leave-one-out quantities from literal refits.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix hat(const Matrix& q) {
  if (q.cols() == 0) return Matrix::Zero(q.rows(), q.rows());
  const Matrix inv = (q.transpose() * q).fullPivLu().inverse();
  return q * inv * q.transpose();
}

inline Matrix annihilator(const Matrix& q) {
  return Matrix::Identity(q.rows(), q.rows()) - hat(q);
}

inline Vector ols(const Matrix& x, const Vector& y) {
  return (x.transpose() * x).fullPivLu().solve(x.transpose() * y);
}

inline Matrix drop_row(const Matrix& m, Index row) {
  Matrix out(m.rows() - 1, m.cols());
  Index k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    if (i != row) out.row(k++) = m.row(i);
  return out;
}

inline Vector drop_entry(const Vector& v, Index row) {
  Vector out(v.size() - 1);
  Index k = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (i != row) out(k++) = v(i);
  return out;
}

/// y_i - x_i' beta_{-i} from an explicit refit without row i.
inline Vector loo_by_refit(const Matrix& x, const Vector& y) {
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const Vector b = ols(drop_row(x, i), drop_entry(y, i));
    out(i) = y(i) - x.row(i).dot(b);
  }
  return out;
}

/// Visits every sign pattern s in {-1, +1}^n.
inline void for_each_sign_pattern(Index n, const std::function<void(const Vector&)>& visit) {
  const unsigned long total = 1ul << n;
  Vector s(n);
  for (unsigned long mask = 0; mask < total; ++mask) {
    for (Index i = 0; i < n; ++i) s(i) = (mask >> i) & 1ul ? 1.0 : -1.0;
    visit(s);
  }
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

}  // namespace oracle
