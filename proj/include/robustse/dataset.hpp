#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace robustse {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Nuisance regressors. One-way fixed effects are carried as group labels so
/// they can be swept out by demeaning instead of materialising n x N dummies.
struct Controls {
  Matrix dense;               // n x q_dense, zero columns allowed
  std::vector<Index> groups;  // labels in [0, n_groups); empty means no fixed effects
  Index n_groups = 0;

  static Controls none(Index n) { return Controls{Matrix(n, 0), {}, 0}; }
  static Controls from_matrix(Matrix b) { return Controls{std::move(b), {}, 0}; }
  /// Labels need not be contiguous; they are relabelled in order of first appearance.
  static Controls from_groups(const std::vector<Index>& labels, Matrix dense = Matrix());

  bool has_groups() const { return !groups.empty(); }
  Index count() const { return dense.cols() + (has_groups() ? n_groups : 0); }

  /// Dummy columns (one per group) followed by the dense block.
  Matrix to_dense(Index n) const;
};

struct Truth {
  Vector beta;    // (alpha', eta')'
  Vector sigma2;  // conditional error variances, one per observation
  Vector errors;  // realised errors when the data were simulated; empty otherwise
};

struct Dataset {
  Vector y;
  Matrix A;    // focal regressors, n x p
  Controls B;  // n x q
  std::optional<Truth> truth;

  Index n() const { return y.size(); }
  Index p() const { return A.cols(); }
  Index q() const { return B.count(); }

  /// Throws InvalidArgument on shape mismatch, p == 0 or nonpositive sigma2.
  void validate() const;

  /// X = [A B] with fixed effects expanded to dummies.
  Matrix design() const;
};

}  // namespace robustse
