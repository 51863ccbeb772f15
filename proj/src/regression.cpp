#include "robustse/regression.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "linalg.hpp"
#include "robustse/error.hpp"

namespace robustse {

namespace {

struct ThinQr {
  Matrix basis;  // n x rank, orthonormal
  Eigen::ColPivHouseholderQR<Matrix> qr;
};

// Full-column-rank decomposition or RankDeficient naming the failed pivots.
ThinQr strict_qr(const Matrix& x) {
  const Index n = x.rows();
  const Index r = x.cols();
  ThinQr out{Matrix(), Eigen::ColPivHouseholderQR<Matrix>(x)};
  out.qr.setThreshold(rank_threshold(n, r));
  const Index rank = out.qr.rank();
  if (rank < r) {
    std::ostringstream os;
    os << "design has rank " << rank << " < " << r << " columns; failed pivots at columns";
    const auto& perm = out.qr.colsPermutation().indices();
    std::vector<Index> failed(perm.data() + rank, perm.data() + r);
    std::sort(failed.begin(), failed.end());
    for (Index j : failed) os << ' ' << j;
    throw Error(ErrorKind::RankDeficient, os.str());
  }
  out.basis = out.qr.householderQ() * Matrix::Identity(n, r);
  return out;
}

Vector clamp_unit(Vector v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

void check_dense_budget(Index n, Index limit) {
  if (n > limit) {
    std::ostringstream os;
    os << "dense " << n << " x " << n << " annihilator exceeds the configured limit n <= " << limit;
    throw Error(ErrorKind::BudgetExceeded, os.str());
  }
}

}  // namespace

OlsFit fit_ols(const Matrix& x, const Vector& y, const Tolerances& tol) {
  const Index n = x.rows();
  const Index r = x.cols();
  if (y.size() != n) throw Error(ErrorKind::InvalidArgument, "y and X have different row counts");
  if (r == 0) throw Error(ErrorKind::InvalidArgument, "design has no columns");
  if (n <= r) {
    std::ostringstream os;
    os << "need more observations than regressors (n = " << n << ", r = " << r << ")";
    throw Error(ErrorKind::DegenerateSample, os.str());
  }

  ThinQr thin = strict_qr(x);
  OlsFit fit;
  fit.rank = r;
  fit.beta_hat = thin.qr.solve(y);
  fit.residuals = y - x * fit.beta_hat;
  fit.m_diag = clamp_unit(Vector::Ones(n) - thin.basis.rowwise().squaredNorm());
  fit.loo_residuals = loo_residuals(fit.residuals, fit.m_diag, tol.existence);
  return fit;
}

OlsFit fit_ols(const Dataset& data, const Tolerances& tol) {
  data.validate();
  return fit_ols(data.design(), data.y, tol);
}

Index PartialledDesign::n_effective() const {
  if (v_hat.rows() == 0) return 0;
  // Rows that are zero up to roundoff do not count.
  const double floor = std::numeric_limits<double>::epsilon() * v_hat.rowwise().squaredNorm().maxCoeff();
  Index count = 0;
  for (Index i = 0; i < v_hat.rows(); ++i)
    if (!dropped[static_cast<std::size_t>(i)] && v_hat.row(i).squaredNorm() > floor) ++count;
  return count;
}

PartialledDesign partial_out(const Matrix& a, const Controls& b, RankPolicy policy,
                             const Tolerances& tol) {
  if (a.cols() == 0) throw Error(ErrorKind::InvalidArgument, "focal block has no columns");
  const Index n = a.rows();
  PartialledDesign out;
  out.controls = ControlsProjector(b, n, policy);
  out.v_hat = out.controls.residualize(a);
  out.dropped.assign(static_cast<std::size_t>(n), false);
  const Vector& lev = out.controls.leverage();
  for (Index i = 0; i < n; ++i) {
    if (lev(i) >= 1.0 - tol.unit_leverage) {
      out.dropped[static_cast<std::size_t>(i)] = true;
      out.v_hat.row(i).setZero();
    }
  }
  out.gram = out.v_hat.transpose() * out.v_hat;
  return out;
}

PartialledDesign partial_out(const Matrix& a, const Matrix& b, RankPolicy policy,
                             const Tolerances& tol) {
  return partial_out(a, b.cols() == 0 ? Controls::none(a.rows()) : Controls::from_matrix(b),
                     policy, tol);
}

Vector annihilator_diag(const Matrix& q) {
  const Index n = q.rows();
  if (q.cols() == 0) return Vector::Ones(n);
  if (q.cols() > n) throw Error(ErrorKind::RankDeficient, "more columns than rows");
  const ThinQr thin = strict_qr(q);
  return clamp_unit(Vector::Ones(n) - thin.basis.rowwise().squaredNorm());
}

AnnihilatorMatrix annihilator_matrix(const Matrix& q, Index dense_limit) {
  const Index n = q.rows();
  check_dense_budget(n, dense_limit);
  AnnihilatorMatrix out;
  out.m = Matrix::Identity(n, n);
  if (q.cols() == 0) return out;
  if (q.cols() > n) throw Error(ErrorKind::RankDeficient, "more columns than rows");
  const ThinQr thin = strict_qr(q);
  out.m.selfadjointView<Eigen::Lower>().rankUpdate(thin.basis, -1.0);
  out.m.triangularView<Eigen::StrictlyUpper>() = out.m.transpose().eval();
  return out;
}

LooResiduals loo_residuals(const Vector& residuals, const Vector& m_diag, double tol) {
  if (residuals.size() != m_diag.size())
    throw Error(ErrorKind::InvalidArgument, "residuals and m_diag differ in length");
  LooResiduals out;
  out.values = Vector::Zero(residuals.size());
  out.feasible.assign(static_cast<std::size_t>(residuals.size()), false);
  for (Index i = 0; i < residuals.size(); ++i) {
    if (m_diag(i) > tol) {
      out.values(i) = residuals(i) / m_diag(i);
      out.feasible[static_cast<std::size_t>(i)] = true;
    }
  }
  return out;
}

double ModelFit::min_m_diag() const {
  double lo = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m_diag.size(); ++i)
    if (!design.dropped[static_cast<std::size_t>(i)]) lo = std::min(lo, m_diag(i));
  return lo;
}

Index ModelFit::dropped_count() const {
  return static_cast<Index>(std::count(design.dropped.begin(), design.dropped.end(), true));
}

namespace {

// L^{-1} V' for gram = L L'; its column norms are the leverages of M_B A.
Matrix whitened_rows(const ModelFit& fit) {
  const auto llt = detail::checked_cholesky(fit.design.gram, fit.n());
  if (!llt) throw Error(ErrorKind::GramSingular, "gram matrix of the partialled-out design is singular");
  return llt->matrixL().solve(fit.design.v_hat.transpose());
}

}  // namespace

ModelFit fit_model(const Dataset& data, const FitOptions& options) {
  data.validate();
  ModelFit fit;
  fit.options = options;
  fit.y = data.y;
  fit.design = partial_out(data.A, data.B, options.controls_policy, options.tol);

  const Index n = data.n();
  const Index p = data.p();
  fit.rank = p + fit.design.controls.rank();
  if (n <= fit.rank) {
    std::ostringstream os;
    os << "need more observations than the regressor rank (n = " << n << ", rank = " << fit.rank
       << ")";
    throw Error(ErrorKind::DegenerateSample, os.str());
  }

  const auto llt = detail::checked_cholesky(fit.design.gram, n);
  if (!llt)
    throw Error(ErrorKind::RankDeficient,
                "focal regressors are collinear with the controls (partialled-out gram is singular)");
  fit.alpha_hat = llt->solve(fit.design.v_hat.transpose() * data.y);

  fit.residuals = fit.design.controls.residualize(data.y) - fit.design.v_hat * fit.alpha_hat;
  const Matrix w = llt->matrixL().solve(fit.design.v_hat.transpose());
  fit.m_diag = Vector::Ones(n) - fit.design.controls.leverage() -
               w.colwise().squaredNorm().transpose();
  fit.m_diag = clamp_unit(fit.m_diag);
  for (Index i = 0; i < n; ++i) {
    if (fit.design.dropped[static_cast<std::size_t>(i)]) {
      fit.residuals(i) = 0.0;
      fit.m_diag(i) = 0.0;
    }
  }
  fit.loo = loo_residuals(fit.residuals, fit.m_diag, options.tol.existence);
  return fit;
}

AnnihilatorMatrix controls_annihilator(const ModelFit& fit) {
  check_dense_budget(fit.n(), fit.options.dense_limit);
  AnnihilatorMatrix out{fit.design.controls.annihilator(), AnnihilatorSource::ControlsOnly};
  for (Index i = 0; i < fit.n(); ++i) {
    if (fit.design.dropped[static_cast<std::size_t>(i)]) {
      out.m.row(i).setZero();
      out.m.col(i).setZero();
    }
  }
  return out;
}

AnnihilatorMatrix model_annihilator(const ModelFit& fit) {
  return model_annihilator(fit, controls_annihilator(fit));
}

AnnihilatorMatrix model_annihilator(const ModelFit& fit, const AnnihilatorMatrix& controls_only) {
  if (controls_only.source != AnnihilatorSource::ControlsOnly || controls_only.m.rows() != fit.n())
    throw Error(ErrorKind::InvalidArgument, "expected the controls-only annihilator of this fit");
  AnnihilatorMatrix out = controls_only;
  out.source = AnnihilatorSource::FullX;
  const Matrix w = whitened_rows(fit);
  out.m.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), -1.0);
  out.m.triangularView<Eigen::StrictlyUpper>() = out.m.transpose().eval();
  return out;
}

}  // namespace robustse
