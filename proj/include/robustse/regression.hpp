#pragma once

#include <Eigen/Dense>
#include <vector>

#include "robustse/dataset.hpp"

namespace robustse {

using DropMask = std::vector<bool>;

struct Tolerances {
  double existence = 1e-10;      // (M_X)_ii must exceed this for a leave-one-out residual
  double unit_leverage = 1e-10;  // rows with (H_B)_ii >= 1 - unit_leverage are dropped
};

/// What to do when the controls are collinear. Projections only depend on the
/// column space, so Reduce keeps a basis and records the redundant columns.
enum class RankPolicy { Strict, Reduce };

struct FitOptions {
  Tolerances tol;
  RankPolicy controls_policy = RankPolicy::Reduce;
  Index dense_limit = 8192;  // largest n for which an n x n annihilator is formed
};

/// Rank threshold for column-pivoted QR, relative to the largest pivot.
double rank_threshold(Index rows, Index cols);

/// Applies M_B: sweeps out fixed effects by group demeaning, then projects off an
/// orthonormal basis of the demeaned dense controls.
class ControlsProjector {
 public:
  ControlsProjector() = default;
  ControlsProjector(const Controls& controls, Index n, RankPolicy policy);

  Index n() const { return n_; }
  Index rank() const { return rank_; }

  Matrix residualize(const Matrix& z) const;
  Vector residualize(const Vector& z) const;

  /// (H_B)_ii.
  const Vector& leverage() const { return leverage_; }

  /// Dense columns skipped as linearly dependent (Reduce policy only).
  const std::vector<Index>& redundant_columns() const { return redundant_; }
  /// Fixed-effect labels that no observation carries.
  Index empty_groups() const { return empty_groups_; }

  /// True when M_B is block diagonal by group (fixed effects only, no dense controls).
  bool block_diagonal() const { return has_groups() && basis_.cols() == 0; }
  bool has_groups() const { return !groups_.empty(); }
  const std::vector<Index>& groups() const { return groups_; }
  const std::vector<Index>& group_sizes() const { return group_size_; }
  const Matrix& basis() const { return basis_; }

  /// Dense n x n M_B.
  Matrix annihilator() const;

 private:
  Matrix demean(const Matrix& z) const;

  Index n_ = 0;
  Index rank_ = 0;
  Index empty_groups_ = 0;
  std::vector<Index> groups_;
  std::vector<Index> group_size_;
  Matrix basis_;
  Vector leverage_;
  std::vector<Index> redundant_;
};

struct LooResiduals {
  Vector values;          // 0 where infeasible
  DropMask feasible;

  bool feasible_at(Index i) const { return feasible[static_cast<std::size_t>(i)]; }
};

struct OlsFit {
  Vector beta_hat;
  Vector residuals;  // y - X beta_hat
  Vector m_diag;     // (M_X)_ii
  LooResiduals loo_residuals;
  Index rank = 0;
};

struct PartialledDesign {
  Matrix v_hat;    // M_B A, rows of dropped observations set to zero
  DropMask dropped;
  Matrix gram;     // sum_i v_i v_i'
  ControlsProjector controls;

  /// Rows whose v_hat is nonzero beyond roundoff.
  Index n_effective() const;
};

enum class AnnihilatorSource { FullX, ControlsOnly };

struct AnnihilatorMatrix {
  Matrix m;
  AnnihilatorSource source = AnnihilatorSource::FullX;
};

/// Least squares on a full-column-rank X via column-pivoted Householder QR.
OlsFit fit_ols(const Matrix& x, const Vector& y, const Tolerances& tol = {});
OlsFit fit_ols(const Dataset& data, const Tolerances& tol = {});

PartialledDesign partial_out(const Matrix& a, const Controls& b,
                             RankPolicy policy = RankPolicy::Strict,
                             const Tolerances& tol = {});
PartialledDesign partial_out(const Matrix& a, const Matrix& b,
                             RankPolicy policy = RankPolicy::Strict,
                             const Tolerances& tol = {});

Vector annihilator_diag(const Matrix& q);

AnnihilatorMatrix annihilator_matrix(const Matrix& q, Index dense_limit = 8192);

/// Leave-one-out prediction errors residual_i / m_i; entries with m_i <= tol are flagged.
LooResiduals loo_residuals(const Vector& residuals, const Vector& m_diag, double tol = 1e-10);

/// Partitioned fit shared by every covariance estimator: alpha_hat from the
/// partialled-out design, residuals and (M_X)_ii from M_X = M_B - H_{M_B A}.
struct ModelFit {
  PartialledDesign design;
  Vector y;
  Vector alpha_hat;
  Vector residuals;
  Vector m_diag;
  LooResiduals loo;
  Index rank = 0;  // p + rank(B)
  FitOptions options;

  Index n() const { return y.size(); }
  Index p() const { return alpha_hat.size(); }
  /// Over rows that are not dropped.
  double min_m_diag() const;
  Index dropped_count() const;
};

ModelFit fit_model(const Dataset& data, const FitOptions& options = {});

/// Dense M_X of a fitted model, formed as M_B - H_{M_B A}.
AnnihilatorMatrix model_annihilator(const ModelFit& fit);
/// Same, reusing an already formed M_B of that fit.
AnnihilatorMatrix model_annihilator(const ModelFit& fit, const AnnihilatorMatrix& controls_only);
/// Dense M_B of a fitted model.
AnnihilatorMatrix controls_annihilator(const ModelFit& fit);

}  // namespace robustse
