#include <algorithm>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "robustse/error.hpp"
#include "robustse/regression.hpp"

namespace robustse {

namespace {

std::string join_indices(const std::vector<Index>& idx) {
  std::ostringstream os;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k) os << ", ";
    os << idx[k];
  }
  return os.str();
}

}  // namespace

Controls Controls::from_groups(const std::vector<Index>& labels, Matrix dense) {
  Controls c;
  c.groups.reserve(labels.size());
  std::unordered_map<Index, Index> relabel;
  for (Index label : labels) {
    auto [it, inserted] = relabel.emplace(label, static_cast<Index>(relabel.size()));
    c.groups.push_back(it->second);
  }
  c.n_groups = static_cast<Index>(relabel.size());
  c.dense = dense.size() == 0 ? Matrix(static_cast<Index>(labels.size()), 0) : std::move(dense);
  return c;
}

Matrix Controls::to_dense(Index n) const {
  const Index g = has_groups() ? n_groups : 0;
  Matrix out = Matrix::Zero(n, g + dense.cols());
  for (std::size_t i = 0; i < groups.size(); ++i) out(static_cast<Index>(i), groups[i]) = 1.0;
  if (dense.cols() > 0) out.rightCols(dense.cols()) = dense;
  return out;
}

void Dataset::validate() const {
  const Index rows = n();
  if (p() < 1) throw Error(ErrorKind::InvalidArgument, "at least one focal regressor is required");
  if (A.rows() != rows)
    throw Error(ErrorKind::InvalidArgument, "focal block has a different row count than y");
  if (B.dense.cols() > 0 && B.dense.rows() != rows)
    throw Error(ErrorKind::InvalidArgument, "control block has a different row count than y");
  if (B.has_groups()) {
    if (static_cast<Index>(B.groups.size()) != rows)
      throw Error(ErrorKind::InvalidArgument, "group labels have a different length than y");
    for (Index g : B.groups)
      if (g < 0 || g >= B.n_groups)
        throw Error(ErrorKind::InvalidArgument, "group label out of range");
  }
  if (!y.allFinite() || !A.allFinite() || !B.dense.allFinite())
    throw Error(ErrorKind::InvalidArgument, "data contain non-finite values");
  if (truth) {
    if (truth->sigma2.size() != rows)
      throw Error(ErrorKind::InvalidArgument, "truth.sigma2 must have one entry per observation");
    if (!(truth->sigma2.array() > 0.0).all())
      throw Error(ErrorKind::InvalidArgument, "truth.sigma2 must be strictly positive");
    if (truth->beta.size() != 0 && truth->beta.size() != p() + q())
      throw Error(ErrorKind::InvalidArgument, "truth.beta must have p + q entries");
  }
}

Matrix Dataset::design() const {
  Matrix x(n(), p() + q());
  x.leftCols(p()) = A;
  if (q() > 0) x.rightCols(q()) = B.to_dense(n());
  return x;
}

double rank_threshold(Index rows, Index cols) {
  return std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(rows, cols));
}

ControlsProjector::ControlsProjector(const Controls& controls, Index n, RankPolicy policy)
    : n_(n), leverage_(Vector::Zero(n)) {
  if (controls.has_groups()) {
    if (static_cast<Index>(controls.groups.size()) != n)
      throw Error(ErrorKind::InvalidArgument, "group labels have a different length than the data");
    groups_ = controls.groups;
    group_size_.assign(static_cast<std::size_t>(controls.n_groups), 0);
    for (Index g : groups_) {
      if (g < 0 || g >= controls.n_groups)
        throw Error(ErrorKind::InvalidArgument, "group label out of range");
      ++group_size_[static_cast<std::size_t>(g)];
    }
    std::vector<Index> empty;
    for (Index g = 0; g < controls.n_groups; ++g)
      if (group_size_[static_cast<std::size_t>(g)] == 0) empty.push_back(g);
    empty_groups_ = static_cast<Index>(empty.size());
    if (!empty.empty() && policy == RankPolicy::Strict)
      throw Error(ErrorKind::ControlsRankDeficient,
                  "fixed-effect levels with no observations: " + join_indices(empty));
    for (Index i = 0; i < n; ++i)
      leverage_(i) = 1.0 / static_cast<double>(group_size_[static_cast<std::size_t>(groups_[i])]);
    rank_ = controls.n_groups - empty_groups_;
  }

  const Index k = controls.dense.cols();
  if (k == 0) {
    basis_.resize(n, 0);
    return;
  }
  if (controls.dense.rows() != n)
    throw Error(ErrorKind::InvalidArgument, "control block has a different row count than the data");

  const Matrix swept = demean(controls.dense);
  Eigen::ColPivHouseholderQR<Matrix> qr(swept);
  qr.setThreshold(rank_threshold(n, k));
  const Index r = qr.rank();
  if (r < k) {
    const auto& perm = qr.colsPermutation().indices();
    for (Index j = r; j < k; ++j) redundant_.push_back(perm(j));
    std::sort(redundant_.begin(), redundant_.end());
    if (policy == RankPolicy::Strict)
      throw Error(ErrorKind::ControlsRankDeficient,
                  "control columns are linearly dependent; failed pivots at columns " +
                      join_indices(redundant_));
  }
  basis_ = qr.householderQ() * Matrix::Identity(n, r);
  leverage_ += basis_.rowwise().squaredNorm();
  rank_ += r;
}

Matrix ControlsProjector::demean(const Matrix& z) const {
  if (groups_.empty()) return z;
  Matrix out = z;
  Matrix sums = Matrix::Zero(static_cast<Index>(group_size_.size()), z.cols());
  for (Index i = 0; i < z.rows(); ++i) sums.row(groups_[i]) += z.row(i);
  for (std::size_t g = 0; g < group_size_.size(); ++g)
    if (group_size_[g] > 0) sums.row(static_cast<Index>(g)) /= static_cast<double>(group_size_[g]);
  for (Index i = 0; i < z.rows(); ++i) out.row(i) -= sums.row(groups_[i]);
  return out;
}

Matrix ControlsProjector::residualize(const Matrix& z) const {
  if (z.rows() != n_) throw Error(ErrorKind::InvalidArgument, "row count does not match controls");
  Matrix out = demean(z);
  if (basis_.cols() > 0) out.noalias() -= basis_ * (basis_.transpose() * out);
  return out;
}

Vector ControlsProjector::residualize(const Vector& z) const {
  Matrix as_matrix = z;
  return residualize(as_matrix).col(0);
}

Matrix ControlsProjector::annihilator() const {
  Matrix m = Matrix::Identity(n_, n_);
  if (!groups_.empty()) {
    std::vector<std::vector<Index>> members(group_size_.size());
    for (Index i = 0; i < n_; ++i) members[static_cast<std::size_t>(groups_[i])].push_back(i);
    for (std::size_t g = 0; g < members.size(); ++g) {
      const double share = members[g].empty() ? 0.0 : 1.0 / static_cast<double>(members[g].size());
      for (Index i : members[g])
        for (Index j : members[g]) m(i, j) -= share;
    }
  }
  if (basis_.cols() > 0) {
    m.selfadjointView<Eigen::Lower>().rankUpdate(basis_, -1.0);
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose().eval();
  }
  return m;
}

}  // namespace robustse
