#include "robustse/variance.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

#include "linalg.hpp"

namespace robustse {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Oracle: return "oracle";
    case Method::HC0: return "hc0";
    case Method::HC2: return "hc2";
    case Method::HC3: return "hc3";
    case Method::HRK: return "hrk";
    case Method::CJN: return "cjn";
    case Method::LooCrossfit: return "loo-crossfit";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Method m : kAllMethods)
    if (lower == to_string(m)) return m;
  if (lower == "ew") return Method::HC0;
  if (lower == "au") return Method::HC2;
  if (lower == "jk") return Method::HC3;
  if (lower == "loo" || lower == "crossfit") return Method::LooCrossfit;
  return std::nullopt;
}

std::set<Method> parse_methods(std::string_view list) {
  std::set<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    std::string_view token = list.substr(start, end - start);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) token.remove_prefix(1);
    while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) token.remove_suffix(1);
    if (!token.empty()) {
      if (token == "all") {
        out.insert(kAllMethods.begin(), kAllMethods.end());
      } else if (auto m = parse_method(token)) {
        out.insert(*m);
      } else {
        throw Error(ErrorKind::InvalidArgument, "unknown method '" + std::string(token) + "'");
      }
    }
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no methods requested");
  return out;
}

namespace {

bool is_dropped(const DropMask& dropped, Index i) {
  return !dropped.empty() && dropped[static_cast<std::size_t>(i)];
}

void require_loo(const LooResiduals& loo, const DropMask& dropped) {
  for (Index i = 0; i < loo.values.size(); ++i) {
    if (!loo.feasible_at(i) && !is_dropped(dropped, i)) {
      std::ostringstream os;
      os << "observation " << i << " has unit leverage; its leave-one-out residual does not exist";
      throw Error(ErrorKind::UnitLeverage, os.str());
    }
  }
}

Index count_negative(const Vector& w, const DropMask& dropped) {
  Index count = 0;
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) < 0.0 && !is_dropped(dropped, i)) ++count;
  return count;
}

std::vector<Index> retained_rows(Index n, const DropMask& dropped) {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    if (!is_dropped(dropped, i)) rows.push_back(i);
  return rows;
}

}  // namespace

VarianceWeights hc_weights(Method kind, const Vector& residuals, const LooResiduals& loo,
                           const DropMask& dropped) {
  if (kind != Method::HC0 && kind != Method::HC2 && kind != Method::HC3)
    throw Error(ErrorKind::InvalidArgument, "hc_weights handles hc0, hc2 and hc3 only");
  if (loo.values.size() != residuals.size())
    throw Error(ErrorKind::InvalidArgument, "residuals and leave-one-out residuals differ in length");

  VarianceWeights out;
  out.method = kind;
  switch (kind) {
    case Method::HC0:
      out.w = residuals.array().square();
      break;
    case Method::HC2:
      require_loo(loo, dropped);
      out.w = residuals.array() * loo.values.array();
      break;
    default:
      require_loo(loo, dropped);
      out.w = loo.values.array().square();
      break;
  }
  out.diagnostics.negative_weights = count_negative(out.w, dropped);
  return out;
}

VarianceWeights crossfit_weights(const Vector& y, const LooResiduals& loo, const DropMask& dropped) {
  if (loo.values.size() != y.size())
    throw Error(ErrorKind::InvalidArgument, "y and leave-one-out residuals differ in length");
  require_loo(loo, dropped);
  VarianceWeights out;
  out.method = Method::LooCrossfit;
  out.w = y.array() * loo.values.array();
  for (Index i = 0; i < y.size(); ++i)
    if (is_dropped(dropped, i)) out.w(i) = 0.0;
  out.diagnostics.negative_weights = count_negative(out.w, dropped);
  return out;
}

VarianceWeights hadamard_unbiased_weights(const AnnihilatorMatrix& m, const Vector& residuals,
                                          const DropMask& dropped) {
  const Index n = residuals.size();
  if (m.m.rows() != n || m.m.cols() != n)
    throw Error(ErrorKind::InvalidArgument, "annihilator and residuals differ in size");

  VarianceWeights out;
  out.method = m.source == AnnihilatorSource::FullX ? Method::HRK : Method::CJN;
  out.w = Vector::Zero(n);

  const std::vector<Index> rows = retained_rows(n, dropped);
  const Index k = static_cast<Index>(rows.size());
  if (k == 0) throw Error(ErrorKind::HadamardSingular, "no observations left to estimate variances");

  const Matrix sub = m.m(rows, rows);
  const Matrix schur = sub.array().square();
  const Vector rhs = residuals(rows).array().square();

  const double min_diag = sub.diagonal().minCoeff();
  out.diagnostics.min_m_diag = min_diag;
  out.diagnostics.hadamard_condition_ok = min_diag > 0.5;

  // (M o M) is positive semidefinite, so symmetric pivoting is enough.
  Eigen::LDLT<Matrix> ldlt(schur);
  const double max_row = schur.cwiseAbs().rowwise().sum().maxCoeff();
  const double floor = std::numeric_limits<double>::epsilon() * static_cast<double>(k) * max_row;
  const double min_pivot = ldlt.vectorD().cwiseAbs().minCoeff();
  if (ldlt.info() != Eigen::Success || !(min_pivot > floor)) {
    std::ostringstream os;
    os << "Hadamard system (M o M) is singular (smallest pivot " << min_pivot << ", threshold "
       << floor << "); the estimator does not exist";
    throw Error(ErrorKind::HadamardSingular, os.str());
  }
  const Vector solved = ldlt.solve(rhs);
  for (Index k2 = 0; k2 < k; ++k2) out.w(rows[static_cast<std::size_t>(k2)]) = solved(k2);
  out.diagnostics.negative_weights = count_negative(out.w, dropped);
  return out;
}

VarianceWeights grouped_hadamard_weights(const ControlsProjector& controls, const Vector& residuals,
                                         const DropMask& dropped) {
  if (!controls.block_diagonal())
    throw Error(ErrorKind::InvalidArgument, "grouped weights need fixed-effect-only controls");
  const Index n = residuals.size();
  if (controls.n() != n) throw Error(ErrorKind::InvalidArgument, "controls and residuals differ in size");

  const auto& groups = controls.groups();
  const auto& sizes = controls.group_sizes();
  VarianceWeights out;
  out.method = Method::CJN;
  out.w = Vector::Zero(n);

  Vector sq_sum = Vector::Zero(static_cast<Index>(sizes.size()));
  for (Index i = 0; i < n; ++i)
    if (!is_dropped(dropped, i)) sq_sum(groups[i]) += residuals(i) * residuals(i);

  double min_diag = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (is_dropped(dropped, i)) continue;
    const double t = static_cast<double>(sizes[static_cast<std::size_t>(groups[i])]);
    min_diag = std::min(min_diag, 1.0 - 1.0 / t);
    // Block (1 - 2/T) I + (1/T^2) J; its row sum is 1 - 1/T.
    const double a = 1.0 - 2.0 / t;
    const double b = 1.0 / (t * t);
    const double floor = std::numeric_limits<double>::epsilon() * static_cast<double>(n) *
                         (std::abs(a) + t * b);
    if (!(std::abs(a) > floor)) {
      std::ostringstream os;
      os << "Hadamard system (M_B o M_B) is singular for groups of size " << t
         << "; the estimator does not exist";
      throw Error(ErrorKind::HadamardSingular, os.str());
    }
    const double r = residuals(i) * residuals(i);
    out.w(i) = (r - b / (a + t * b) * sq_sum(groups[i])) / a;
  }
  if (!std::isfinite(min_diag)) throw Error(ErrorKind::HadamardSingular, "no observations left to estimate variances");
  out.diagnostics.min_m_diag = min_diag;
  out.diagnostics.hadamard_condition_ok = min_diag > 0.5;
  out.diagnostics.negative_weights = count_negative(out.w, dropped);
  return out;
}

VarianceWeights oracle_weights(const Vector& sigma2) {
  VarianceWeights out;
  out.method = Method::Oracle;
  out.w = sigma2;
  out.diagnostics.negative_weights = count_negative(out.w, {});
  return out;
}

CovarianceEstimate sandwich(const PartialledDesign& design, const VarianceWeights& w) {
  const Matrix& v = design.v_hat;
  if (w.w.size() != v.rows()) throw Error(ErrorKind::InvalidArgument, "weights and design differ in length");
  if (!w.feasible) throw Error(ErrorKind::InvalidArgument, "weights are flagged infeasible");

  const auto llt = detail::checked_cholesky(design.gram, v.rows());
  if (!llt) throw Error(ErrorKind::GramSingular, "gram matrix of the partialled-out design is singular");

  const Matrix meat = v.transpose() * w.w.asDiagonal() * v;
  const Matrix half = llt->solve(meat);
  Matrix omega = llt->solve(half.transpose());
  omega = 0.5 * (omega + omega.transpose()).eval();

  CovarianceEstimate out;
  out.omega = std::move(omega);
  out.method = w.method;
  out.n_effective = design.n_effective();

  Index negative = 0;
  for (Index i = 0; i < v.rows(); ++i)
    if (w.w(i) < 0.0 && v.row(i).squaredNorm() > 0.0) ++negative;
  if (negative > 0) {
    std::ostringstream os;
    os << negative << " negative variance weight" << (negative == 1 ? "" : "s");
    out.warnings.push_back(os.str());
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.omega, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -1e-14 * scale) {
    out.indefinite = true;
    out.warnings.emplace_back("covariance estimate is not positive semidefinite");
  }
  return out;
}

std::map<Method, MethodOutcome> estimate_methods(const ModelFit& fit,
                                                 const std::set<Method>& methods,
                                                 const std::optional<Vector>& oracle_variances) {
  const DropMask& dropped = fit.design.dropped;
  std::optional<AnnihilatorMatrix> controls_m;
  auto controls_only = [&]() -> const AnnihilatorMatrix& {
    if (!controls_m) controls_m = controls_annihilator(fit);
    return *controls_m;
  };

  std::map<Method, MethodOutcome> out;
  for (Method m : methods) {
    MethodOutcome outcome;
    outcome.method = m;
    try {
      VarianceWeights w;
      switch (m) {
        case Method::Oracle:
          if (!oracle_variances)
            throw Error(ErrorKind::MissingTruth, "oracle weights need the true error variances");
          if (oracle_variances->size() != fit.n())
            throw Error(ErrorKind::InvalidArgument, "oracle variances differ in length from the data");
          w = oracle_weights(*oracle_variances);
          break;
        case Method::HC0:
        case Method::HC2:
        case Method::HC3:
          w = hc_weights(m, fit.residuals, fit.loo, dropped);
          break;
        case Method::LooCrossfit:
          w = crossfit_weights(fit.y, fit.loo, dropped);
          break;
        case Method::HRK:
          w = hadamard_unbiased_weights(model_annihilator(fit, controls_only()), fit.residuals, dropped);
          break;
        case Method::CJN:
          w = fit.design.controls.block_diagonal()
                  ? grouped_hadamard_weights(fit.design.controls, fit.residuals, dropped)
                  : hadamard_unbiased_weights(controls_only(), fit.residuals, dropped);
          break;
      }
      if (std::isnan(w.diagnostics.min_m_diag)) w.diagnostics.min_m_diag = fit.min_m_diag();
      outcome.diagnostics = w.diagnostics;
      outcome.estimate = sandwich(fit.design, w);
    } catch (const Error& e) {
      outcome.error = e.kind();
      outcome.message = e.what();
    }
    out.emplace(m, std::move(outcome));
  }
  return out;
}

EstimateSet estimate_all(const Dataset& data, const std::set<Method>& methods,
                         const FitOptions& options) {
  EstimateSet out;
  out.fit = fit_model(data, options);

  const auto& controls = out.fit.design.controls;
  for (Index j : controls.redundant_columns()) {
    std::ostringstream os;
    os << "control column " << j << " is linearly dependent on the others and was ignored";
    out.warnings.push_back(os.str());
  }
  if (controls.empty_groups() > 0) {
    std::ostringstream os;
    os << controls.empty_groups() << " fixed-effect level(s) have no observations";
    out.warnings.push_back(os.str());
  }
  for (Index i = 0; i < out.fit.n(); ++i) {
    if (out.fit.design.dropped[static_cast<std::size_t>(i)]) {
      std::ostringstream os;
      os << "observation dropped: unit leverage in controls (row " << i << ")";
      out.warnings.push_back(os.str());
    }
  }

  std::optional<Vector> sigma2;
  if (data.truth) sigma2 = data.truth->sigma2;
  out.outcomes = estimate_methods(out.fit, methods, sigma2);
  return out;
}

}  // namespace robustse
