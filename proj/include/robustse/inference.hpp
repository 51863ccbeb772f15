#pragma once

#include <map>
#include <optional>
#include <vector>

#include "robustse/dataset.hpp"
#include "robustse/variance.hpp"

namespace robustse {

/// Standard normal CDF via erfc, accurate in both tails.
double normal_cdf(double x);
/// Two-sided normal critical value: Phi^{-1}(1 - level / 2).
double normal_critical_value(double level);
/// P(chi2_df > x) via the regularized upper incomplete gamma function.
double chi_square_upper(double x, int df);

inline const std::vector<double>& default_levels() {
  static const std::vector<double> levels{0.01, 0.05, 0.10};
  return levels;
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::map<double, bool> reject_at;  // level -> p_value < level
  std::optional<Method> method;
};

/// Two-sided t-test of alpha = alpha0 against the standard normal.
/// Throws NonpositiveVariance when omega_jj is not strictly positive.
TestResult t_test(double alpha_hat, double alpha0, double omega_jj,
                  const std::vector<double>& levels = default_levels());

/// Wald test against chi-square(p). Throws SingularOmega or IndefiniteOmega.
TestResult wald_test(const Vector& alpha_hat, const Vector& alpha0, const Matrix& omega,
                     const std::vector<double>& levels = default_levels());

}  // namespace robustse
