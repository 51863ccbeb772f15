#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "robustse/error.hpp"
#include "robustse/inference.hpp"
#include "robustse/montecarlo.hpp"

using namespace robustse;
using Catch::Matchers::WithinAbs;

namespace {

// Phi(x) by quadrature of the density, independent of erfc.
double phi_by_quadrature(double x) {
  const double half = oracle::simpson(oracle::normal_pdf, 0.0, std::abs(x), 4000);
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

}  // namespace

TEST_CASE("normal cdf matches quadrature", "[inference]") {
  for (double x : {-4.0, -1.959964, -0.3, 0.0, 0.7, 1.644854, 2.575829, 5.0})
    CHECK_THAT(normal_cdf(x), WithinAbs(phi_by_quadrature(x), 1e-12));
  CHECK(normal_cdf(-37.0) > 0.0);  // still representable, no cancellation
}

TEST_CASE("critical values invert the cdf", "[inference]") {
  for (double level : {0.01, 0.05, 0.10, 0.5}) {
    const double z = normal_critical_value(level);
    CHECK_THAT(2.0 * (1.0 - phi_by_quadrature(z)), WithinAbs(level, 1e-10));
  }
  CHECK_THAT(normal_critical_value(0.05), WithinAbs(1.959963984540054, 1e-12));
}

TEST_CASE("t_test examples", "[inference][t]") {
  const TestResult r = t_test(1.2, 1.0, 0.01);
  CHECK_THAT(r.statistic, WithinAbs(2.0, 1e-12));
  CHECK_THAT(r.p_value, WithinAbs(0.0455, 5e-5));
  CHECK(r.reject_at.at(0.05));
  CHECK_FALSE(r.reject_at.at(0.01));

  const TestResult zero = t_test(1.0, 1.0, 0.3);
  CHECK(zero.statistic == 0.0);
  CHECK(zero.p_value == 1.0);

  const TestResult boundary = t_test(1.959964, 0.0, 1.0);
  CHECK_THAT(boundary.p_value, WithinAbs(0.05, 1e-6));
  CHECK_THAT(boundary.p_value, WithinAbs(2.0 * (1.0 - phi_by_quadrature(1.959964)), 1e-12));
}

TEST_CASE("t_test p-value is monotone and consistent with rejections", "[inference][t][property]") {
  double previous = 1.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = 0.01 * k;
    const TestResult r = t_test(t, 0.0, 1.0);
    CHECK(r.p_value <= previous);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    for (const auto& [level, reject] : r.reject_at) CHECK(reject == (r.p_value < level));
    previous = r.p_value;
  }
}

TEST_CASE("t_test rejects a nonpositive variance", "[inference][t]") {
  for (double omega : {0.0, -0.5}) {
    try {
      t_test(1.0, 0.0, omega);
      FAIL("expected NonpositiveVariance");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonpositiveVariance);
    }
  }
}

TEST_CASE("wald_test examples", "[inference][wald]") {
  const TestResult one = wald_test(Vector::Constant(1, 1.2), Vector::Constant(1, 1.0),
                                   Matrix::Constant(1, 1, 0.01));
  const TestResult t = t_test(1.2, 1.0, 0.01);
  CHECK_THAT(one.statistic, WithinAbs(t.statistic * t.statistic, 1e-12));
  CHECK_THAT(one.p_value, WithinAbs(t.p_value, 1e-12));

  const TestResult zero = wald_test(Vector::Ones(2), Vector::Ones(2), Matrix::Identity(2, 2));
  CHECK(zero.statistic == 0.0);
  CHECK(zero.p_value == 1.0);

  const TestResult two = wald_test(Vector::Ones(2), Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK_THAT(two.statistic, WithinAbs(2.0, 1e-12));
  CHECK_THAT(two.p_value, WithinAbs(std::exp(-1.0), 1e-12));
}

TEST_CASE("chi-square tail", "[inference]") {
  // df = 2 has the closed form exp(-x/2); df = 1 reduces to the two-sided normal tail.
  for (double x : {0.1, 1.0, 3.0, 10.0}) {
    CHECK_THAT(chi_square_upper(x, 2), WithinAbs(std::exp(-x / 2.0), 1e-14));
    CHECK_THAT(chi_square_upper(x, 1), WithinAbs(2.0 * (1.0 - phi_by_quadrature(std::sqrt(x))), 1e-12));
  }
}

TEST_CASE("wald_test errors", "[inference][wald]") {
  Matrix singular(2, 2);
  singular << 1, 1, 1, 1;
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  auto kind = [](const Matrix& omega) {
    try {
      wald_test(Vector::Ones(2), Vector::Zero(2), omega);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind(singular) == ErrorKind::SingularOmega);
  CHECK(kind(indefinite) == ErrorKind::IndefiniteOmega);
}

TEST_CASE("oracle t-test has nominal size", "[inference][size][slow]") {
  // n = 500, homoskedastic normal errors, exact conditional variance.
  const Index reps = 10000;
  Index rejections = 0;
  for (Index r = 0; r < reps; ++r) {
    Rng rng = replication_stream(20240601, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset d;
    d.A.resize(500, 1);
    d.y.resize(500);
    for (Index i = 0; i < 500; ++i) d.A(i, 0) = normal(rng);
    for (Index i = 0; i < 500; ++i) d.y(i) = d.A(i, 0) + normal(rng);
    d.B = Controls::from_matrix(Matrix::Ones(500, 1));
    const ModelFit fit = fit_model(d);
    const double omega = sandwich(fit.design, oracle_weights(Vector::Ones(500))).omega(0, 0);
    if (t_test(fit.alpha_hat(0), 1.0, omega).reject_at.at(0.05)) ++rejections;
  }
  const double size = static_cast<double>(rejections) / reps;
  CHECK(size >= 0.04);
  CHECK(size <= 0.06);
}
