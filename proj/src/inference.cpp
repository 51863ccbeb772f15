#include "robustse/inference.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

namespace robustse {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::InvalidArgument, "significance level must lie in (0, 1)");
  // Phi^{-1}(1 - level/2) = sqrt(2) * erfc^{-1}(level)
  return std::sqrt(2.0) * boost::math::erfc_inv(level);
}

double chi_square_upper(double x, int df) {
  if (df < 1) throw Error(ErrorKind::InvalidArgument, "chi-square needs df >= 1");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

namespace {

void fill_rejections(TestResult& r, const std::vector<double>& levels) {
  for (double level : levels) r.reject_at[level] = r.p_value < level;
}

}  // namespace

TestResult t_test(double alpha_hat, double alpha0, double omega_jj,
                  const std::vector<double>& levels) {
  if (!(omega_jj > 0.0) || !std::isfinite(omega_jj)) {
    std::ostringstream os;
    os << "variance estimate " << omega_jj << " is not positive; the t statistic is undefined";
    throw Error(ErrorKind::NonpositiveVariance, os.str());
  }
  TestResult r;
  r.statistic = (alpha_hat - alpha0) / std::sqrt(omega_jj);
  r.p_value = std::erfc(std::abs(r.statistic) / std::sqrt(2.0));
  fill_rejections(r, levels);
  return r;
}

TestResult wald_test(const Vector& alpha_hat, const Vector& alpha0, const Matrix& omega,
                     const std::vector<double>& levels) {
  const Index p = alpha_hat.size();
  if (alpha0.size() != p || omega.rows() != p || omega.cols() != p || p == 0)
    throw Error(ErrorKind::InvalidArgument, "wald_test: dimension mismatch");

  const Matrix sym = 0.5 * (omega + omega.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const auto& ev = eig.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(p) * scale;
  if (ev.minCoeff() < -tol) throw Error(ErrorKind::IndefiniteOmega, "covariance matrix is indefinite");
  if (!(ev.minCoeff() > tol)) throw Error(ErrorKind::SingularOmega, "covariance matrix is singular");

  const Vector d = alpha_hat - alpha0;
  const Vector z = eig.eigenvectors().transpose() * d;
  TestResult r;
  r.statistic = (z.array().square() / ev.array()).sum();
  r.p_value = chi_square_upper(r.statistic, static_cast<int>(p));
  fill_rejections(r, levels);
  return r;
}

}  // namespace robustse
