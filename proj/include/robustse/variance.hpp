#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "robustse/error.hpp"
#include "robustse/regression.hpp"

namespace robustse {

/// Per-observation variance estimators that can be plugged into the sandwich.
enum class Method {
  Oracle,       // true sigma_i^2 (or realised eps_i^2 in simulations)
  HC0,          // eps_hat^2, Eicker-White
  HC2,          // eps_hat * eps_loo, almost-unbiased
  HC3,          // eps_loo^2, jackknife
  HRK,          // (M_X o M_X)^{-1} (eps_hat o eps_hat)
  CJN,          // (M_B o M_B)^{-1} (eps_hat o eps_hat)
  LooCrossfit,  // y * eps_loo
};

inline constexpr std::array<Method, 7> kAllMethods = {
    Method::Oracle, Method::HC0, Method::HC2, Method::HC3,
    Method::HRK,    Method::CJN, Method::LooCrossfit};

std::string_view to_string(Method m);
/// Accepts the canonical names plus the aliases ew, au, jk, loo, crossfit.
std::optional<Method> parse_method(std::string_view name);
/// Comma-separated list; "all" expands to every method. Throws InvalidArgument.
std::set<Method> parse_methods(std::string_view list);

struct WeightDiagnostics {
  double min_m_diag = std::numeric_limits<double>::quiet_NaN();
  std::optional<bool> hadamard_condition_ok;  // min_i M_ii > 1/2
  Index negative_weights = 0;
};

struct VarianceWeights {
  Method method = Method::HC0;
  Vector w;
  bool feasible = true;
  WeightDiagnostics diagnostics;
};

VarianceWeights hc_weights(Method kind, const Vector& residuals, const LooResiduals& loo,
                           const DropMask& dropped = {});

VarianceWeights crossfit_weights(const Vector& y, const LooResiduals& loo,
                                 const DropMask& dropped = {});

/// Solves (M o M) w = eps_hat o eps_hat over the rows that are not dropped.
/// A full-X annihilator gives the HRK estimator, a controls-only one gives CJN.
VarianceWeights hadamard_unbiased_weights(const AnnihilatorMatrix& m, const Vector& residuals,
                                          const DropMask& dropped = {});

/// CJN weights when M_B is block diagonal by fixed-effect group; each block of
/// (M_B o M_B) is (1 - 2/T) I + J / T^2 and is inverted in closed form.
VarianceWeights grouped_hadamard_weights(const ControlsProjector& controls,
                                         const Vector& residuals, const DropMask& dropped = {});

VarianceWeights oracle_weights(const Vector& sigma2);

struct CovarianceEstimate {
  Matrix omega;  // p x p
  Method method = Method::HC0;
  Index n_effective = 0;
  bool indefinite = false;
  std::vector<std::string> warnings;
};

CovarianceEstimate sandwich(const PartialledDesign& design, const VarianceWeights& w);

struct MethodOutcome {
  Method method = Method::HC0;
  std::optional<CovarianceEstimate> estimate;
  std::optional<ErrorKind> error;
  std::string message;
  WeightDiagnostics diagnostics;

  bool ok() const { return estimate.has_value(); }
};

struct EstimateSet {
  ModelFit fit;
  std::map<Method, MethodOutcome> outcomes;
  std::vector<std::string> warnings;
};

/// Evaluates every requested method on one shared fit. Failures are recorded
/// per method. Oracle uses `oracle_variances` when given, otherwise it fails
/// with MissingTruth.
std::map<Method, MethodOutcome> estimate_methods(const ModelFit& fit,
                                                 const std::set<Method>& methods,
                                                 const std::optional<Vector>& oracle_variances);

/// Fits once and evaluates every requested method; the oracle reads truth.sigma2.
EstimateSet estimate_all(const Dataset& data, const std::set<Method>& methods,
                         const FitOptions& options = {});

}  // namespace robustse
