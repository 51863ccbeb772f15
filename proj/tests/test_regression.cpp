#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "robustse/error.hpp"
#include "robustse/regression.hpp"

using namespace robustse;
using Catch::Matchers::WithinAbs;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Vector vec(std::initializer_list<double> v) { return col(v).col(0); }

void require_close(const Matrix& a, const Matrix& b, double tol) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  REQUIRE((a - b).cwiseAbs().maxCoeff() <= tol);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected robustse::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("fit_ols on the two-point example", "[fit_ols]") {
  const OlsFit fit = fit_ols(col({1, 2}), vec({1, 3}));
  CHECK_THAT(fit.beta_hat(0), WithinAbs(7.0 / 5.0, 1e-14));
  require_close(fit.residuals, vec({-2.0 / 5, 1.0 / 5}), 1e-14);
  require_close(fit.m_diag, vec({4.0 / 5, 1.0 / 5}), 1e-14);
  require_close(fit.loo_residuals.values, vec({-0.5, 1.0}), 1e-13);

  // beta_{-1} = 3/2 and beta_{-2} = 1 from the literal refits.
  require_close(oracle::loo_by_refit(col({1, 2}), vec({1, 3})), vec({-0.5, 1.0}), 1e-13);
}

TEST_CASE("fit_ols with an intercept only", "[fit_ols]") {
  const OlsFit fit = fit_ols(Matrix::Ones(3, 1), vec({1, 2, 6}));
  require_close(fit.residuals, vec({-2, -1, 3}), 1e-13);
  require_close(fit.m_diag, Vector::Constant(3, 2.0 / 3), 1e-14);
  require_close(fit.loo_residuals.values, vec({-3, -1.5, 4.5}), 1e-13);
  CHECK(fit.rank == 1);
}

TEST_CASE("fit_ols reproduces an exact fit", "[fit_ols]") {
  std::mt19937_64 rng(3);
  const Matrix x = oracle::random_matrix(12, 3, rng);
  const Vector beta = vec({0.5, -2.0, 3.0});
  const OlsFit fit = fit_ols(x, x * beta);
  require_close(fit.beta_hat, beta, 1e-12);
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.loo_residuals.values.cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("fit_ols errors", "[fit_ols]") {
  Matrix x(4, 2);
  x << 1, 2, 1, 2, 1, 2, 1, 2;
  CHECK(kind_of([&] { fit_ols(x, Vector::Ones(4)); }) == ErrorKind::RankDeficient);
  CHECK(kind_of([&] { fit_ols(Matrix::Identity(3, 3), Vector::Ones(3)); }) ==
        ErrorKind::DegenerateSample);

  try {
    fit_ols(x, Vector::Ones(4));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("failed pivots") != std::string::npos);
  }
}

TEST_CASE("partial_out demeans against an intercept", "[partial_out]") {
  const PartialledDesign d = partial_out(col({1, 2, 3}), Matrix::Ones(3, 1));
  require_close(d.v_hat, col({-1, 0, 1}), 1e-14);
  CHECK_THAT(d.gram(0, 0), WithinAbs(2.0, 1e-14));
  CHECK(d.n_effective() == 2);
}

TEST_CASE("partial_out without controls", "[partial_out]") {
  const Matrix a = col({1, 2, 3, 4});
  const PartialledDesign d = partial_out(a, Matrix(4, 0));
  require_close(d.v_hat, a, 0.0);
  for (bool dropped : d.dropped) CHECK_FALSE(dropped);
}

TEST_CASE("a control that singles out one observation drops it", "[partial_out][drop]") {
  std::mt19937_64 rng(17);
  const Index n = 10;
  const Index k = 6;
  Matrix a = oracle::random_matrix(n, 1, rng);
  Matrix b(n, 3);
  b.col(0).setOnes();
  b.col(1) = oracle::random_matrix(n, 1, rng).col(0);
  b.col(2).setZero();
  b(k, 2) = 1.0;
  const Vector y = oracle::random_matrix(n, 1, rng).col(0);

  const PartialledDesign full = partial_out(a, b);
  CHECK(full.dropped[k]);
  CHECK(full.v_hat.row(k).norm() < 1e-14);

  const Matrix a_del = oracle::drop_row(a, k);
  const Matrix b_del = oracle::drop_row(b, k).leftCols(2);
  const PartialledDesign reduced = partial_out(a_del, b_del);
  require_close(full.gram, reduced.gram, 1e-12);

  Dataset with{y, a, Controls::from_matrix(b), {}};
  Dataset without{oracle::drop_entry(y, k), a_del, Controls::from_matrix(b_del), {}};
  const ModelFit f1 = fit_model(with);
  const ModelFit f2 = fit_model(without);
  require_close(f1.alpha_hat, f2.alpha_hat, 1e-12);
  CHECK(f1.dropped_count() == 1);
  CHECK(f1.m_diag(k) == 0.0);
  CHECK_FALSE(f1.loo.feasible[k]);
}

TEST_CASE("partial_out reports collinear controls", "[partial_out]") {
  Matrix b(5, 3);
  b.col(0).setOnes();
  b.col(1) << 1, 2, 3, 4, 5;
  b.col(2) = 2.0 * b.col(0) - b.col(1);
  const Matrix a = col({0.3, -1, 2, 0.5, 1});
  try {
    partial_out(a, b);
    FAIL("expected ControlsRankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ControlsRankDeficient);
    CHECK(std::string(e.what()).find("failed pivots") != std::string::npos);
  }
  const PartialledDesign reduced = partial_out(a, b, RankPolicy::Reduce);
  CHECK(reduced.controls.rank() == 2);
  CHECK(reduced.controls.redundant_columns().size() == 1);
  require_close(reduced.v_hat, partial_out(a, Matrix(b.leftCols(2))).v_hat, 1e-12);
}

TEST_CASE("annihilator_diag examples", "[annihilator]") {
  require_close(annihilator_diag(Matrix::Ones(4, 1)), Vector::Constant(4, 0.75), 1e-15);
  require_close(annihilator_diag(Matrix::Identity(5, 5)), Vector::Zero(5), 1e-15);

  // One-way panel, N = 4 units, T = 2 periods.
  Controls fe = Controls::from_groups({0, 0, 1, 1, 2, 2, 3, 3});
  require_close(annihilator_diag(fe.to_dense(8)), Vector::Constant(8, 0.5), 1e-15);

  Matrix singular(3, 2);
  singular << 1, 1, 1, 1, 1, 1;
  CHECK(kind_of([&] { annihilator_diag(singular); }) == ErrorKind::RankDeficient);
}

TEST_CASE("annihilator_matrix examples", "[annihilator]") {
  const AnnihilatorMatrix m = annihilator_matrix(Matrix::Ones(3, 1));
  Matrix expected = Matrix::Constant(3, 3, -1.0 / 3);
  expected.diagonal().setConstant(2.0 / 3);
  require_close(m.m, expected, 1e-15);

  CHECK(kind_of([&] { annihilator_matrix(Matrix::Ones(20, 1), 10); }) ==
        ErrorKind::BudgetExceeded);
}

TEST_CASE("projection identities on random instances", "[annihilator][property]") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix q = oracle::random_matrix(20, 3, rng);
    const Matrix m = annihilator_matrix(q).m;
    require_close(m, m.transpose(), 1e-12);
    require_close(m * m, m, 1e-10);
    CHECK_THAT(m.trace(), WithinAbs(17.0, 1e-10));
    require_close(m.array().square().rowwise().sum().matrix(), m.diagonal(), 1e-10);
    require_close(m, oracle::annihilator(q), 1e-10);
    require_close(annihilator_diag(q), m.diagonal(), 1e-12);
  }
}

TEST_CASE("M_X equals M_B minus the hat matrix of M_B A", "[annihilator][property]") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_matrix(15, 2, rng);
    const Matrix b = oracle::random_matrix(15, 4, rng);
    Matrix x(15, 6);
    x << a, b;
    const Matrix mb = annihilator_matrix(b).m;
    const Matrix rhs = mb - oracle::hat(mb * a);
    require_close(annihilator_matrix(x).m, rhs, 1e-10);

    Dataset d{oracle::random_matrix(15, 1, rng).col(0), a, Controls::from_matrix(b), {}};
    require_close(model_annihilator(fit_model(d)).m, rhs, 1e-10);
  }
}

TEST_CASE("loo_residuals", "[loo]") {
  const LooResiduals r = loo_residuals(vec({-0.4, 0.2}), vec({0.8, 0.2}));
  require_close(r.values, vec({-0.5, 1.0}), 1e-15);

  const LooResiduals unit = loo_residuals(vec({0.7}), vec({1.0}));
  CHECK(unit.values(0) == 0.7);

  const LooResiduals zero = loo_residuals(vec({0.0, 1.0}), vec({0.0, 0.5}));
  CHECK_FALSE(zero.feasible[0]);
  CHECK(zero.feasible[1]);
}

TEST_CASE("residuals equal M_X times the errors", "[fit_ols][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(25, 4, rng);
    const Vector eps = oracle::random_matrix(25, 1, rng).col(0);
    const Vector beta = oracle::random_matrix(4, 1, rng).col(0);
    const OlsFit fit = fit_ols(x, x * beta + eps);
    require_close(fit.residuals, oracle::annihilator(x) * eps, 1e-10);
    CHECK((x.transpose() * fit.residuals).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THAT(fit.m_diag.sum(), WithinAbs(21.0, 1e-10));
  }
}

TEST_CASE("leave-one-out residuals match literal refits", "[loo][property]") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(12, 3, rng);
    const Vector y = oracle::random_matrix(12, 1, rng).col(0);
    const OlsFit fit = fit_ols(x, y);
    require_close(fit.loo_residuals.values, oracle::loo_by_refit(x, y), 1e-8);
  }
}

TEST_CASE("partitioned fit agrees with the full regression", "[fit_model][property]") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_matrix(30, 2, rng);
    const Matrix b = oracle::random_matrix(30, 5, rng);
    const Vector y = oracle::random_matrix(30, 1, rng).col(0);
    Matrix x(30, 7);
    x << a, b;
    const OlsFit full = fit_ols(x, y);
    const ModelFit part = fit_model(Dataset{y, a, Controls::from_matrix(b), {}});
    require_close(part.alpha_hat, full.beta_hat.head(2), 1e-10);
    require_close(part.residuals, full.residuals, 1e-10);
    require_close(part.m_diag, full.m_diag, 1e-10);
    CHECK(part.rank == 7);

    // alpha from the gram of the partialled-out design
    const PartialledDesign d = partial_out(a, b);
    const Vector alpha = d.gram.ldlt().solve(d.v_hat.transpose() * y);
    require_close(alpha, full.beta_hat.head(2), 1e-10);
  }
}

TEST_CASE("cross-product identity of the scaled annihilator", "[annihilator][property]") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = oracle::random_matrix(12, 3, rng);
    const Matrix m = annihilator_matrix(x).m;
    const Matrix scaled = m.diagonal().asDiagonal().inverse() * m;  // m_ij = M_ij / M_ii
    const Matrix lhs = scaled * scaled.transpose();
    const Vector d = m.diagonal();
    const Matrix rhs = m.array() / (d * d.transpose()).array();
    require_close(lhs, rhs, 1e-9);
  }
}

TEST_CASE("fixed-effect sweep matches the dense dummy path", "[controls][fe]") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size_dist(1, 4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Index> labels;
    for (Index g = 0; g < 12; ++g) {
      const int t = size_dist(rng);
      for (int k = 0; k < t; ++k) labels.push_back(g);
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const Index n = static_cast<Index>(labels.size());
    const Matrix a = oracle::random_matrix(n, 2, rng);
    const Matrix extra = oracle::random_matrix(n, trial % 2, rng);
    const Vector y = oracle::random_matrix(n, 1, rng).col(0);

    const Controls grouped = Controls::from_groups(labels, extra);
    const Controls dense = Controls::from_matrix(grouped.to_dense(n));
    const ModelFit fast = fit_model(Dataset{y, a, grouped, {}});
    const ModelFit slow = fit_model(Dataset{y, a, dense, {}});

    require_close(fast.design.v_hat, slow.design.v_hat, 1e-9);
    require_close(fast.design.controls.leverage(), slow.design.controls.leverage(), 1e-9);
    require_close(fast.m_diag, slow.m_diag, 1e-9);
    require_close(fast.residuals, slow.residuals, 1e-9);
    require_close(fast.alpha_hat, slow.alpha_hat, 1e-9);
    CHECK(fast.design.dropped == slow.design.dropped);
    require_close(controls_annihilator(fast).m, controls_annihilator(slow).m, 1e-9);
    require_close(model_annihilator(fast).m, model_annihilator(slow).m, 1e-9);
  }
}

TEST_CASE("dataset validation", "[dataset]") {
  Dataset d{Vector::Ones(3), Matrix::Ones(3, 1), Controls::none(3), Truth{Vector(), vec({1, 0, 1}), Vector()}};
  CHECK(kind_of([&] { d.validate(); }) == ErrorKind::InvalidArgument);
  d.truth->sigma2 = vec({1, 2, 3});
  CHECK_NOTHROW(d.validate());
  d.A.resize(3, 0);
  CHECK(kind_of([&] { d.validate(); }) == ErrorKind::InvalidArgument);
}
