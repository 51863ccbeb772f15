#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>

namespace robustse::detail {

/// Cholesky factor of a symmetric matrix that is positive definite in a
/// numerically meaningful sense: every squared pivot must exceed
/// eps * dim * (largest diagonal entry).
inline std::optional<Eigen::LLT<Eigen::MatrixXd>> checked_cholesky(
    const Eigen::MatrixXd& s, Eigen::Index scale_dim) {
  if (s.rows() == 0) return std::nullopt;
  const double max_diag = s.diagonal().cwiseAbs().maxCoeff();
  if (!(max_diag > 0.0)) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const double floor = std::numeric_limits<double>::epsilon() *
                       static_cast<double>(scale_dim) * max_diag;
  const auto l_diag = llt.matrixLLT().diagonal();
  if (!(l_diag.cwiseAbs2().minCoeff() > floor)) return std::nullopt;
  return llt;
}

}  // namespace robustse::detail
