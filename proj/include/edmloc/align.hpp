#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <vector>

#include "edmloc/types.hpp"

namespace edmloc {

/// Orthogonal Procrustes registration of X_hat onto X_ref: centers both point
/// sets, solves for the orthogonal map (reflections allowed, no scaling) via
/// the SVD of the cross-covariance, and re-translates. If the transformed set
/// somehow fits worse than the input (possible only through rounding, because
/// the identity map is feasible), the input is returned unchanged, so
/// alignment never increases the registration residual.
inline CoordinateMatrix procrustes_align(const CoordinateMatrix& X_hat,
                                         const CoordinateMatrix& X_ref) {
  if (X_hat.n() != X_ref.n() || X_hat.k() != X_ref.k())
    throw ContractError("procrustes_align: shape mismatch");
  const int n = X_hat.n();

  const Eigen::RowVectorXd centroid_hat = X_hat.m().colwise().mean();
  const Eigen::RowVectorXd centroid_ref = X_ref.m().colwise().mean();
  const Matrix centered_hat = X_hat.m().rowwise() - centroid_hat;
  const Matrix centered_ref = X_ref.m().rowwise() - centroid_ref;

  const Matrix cross = centered_hat.transpose() * centered_ref;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rotation = svd.matrixU() * svd.matrixV().transpose();

  Matrix aligned = centered_hat * rotation;
  aligned.rowwise() += centroid_ref;

  const double before = (X_hat.m() - X_ref.m()).squaredNorm();
  const double after = (aligned - X_ref.m()).squaredNorm();
  if (after >= before) return X_hat;
  return CoordinateMatrix(std::move(aligned));
}

/// Mean over the node set of the Euclidean distance between recovered and
/// reference positions (the distances themselves, not their squares). The
/// inputs are assumed to be expressed in a common frame already.
inline double msle(const CoordinateMatrix& X_hat_aligned, const CoordinateMatrix& X_ref,
                   const std::vector<int>& nodes) {
  if (X_hat_aligned.n() != X_ref.n() || X_hat_aligned.k() != X_ref.k())
    throw ContractError("msle: shape mismatch");
  if (nodes.empty()) throw ContractError("msle: node set must be non-empty");
  double total = 0.0;
  for (int i : nodes) {
    if (i < 0 || i >= X_ref.n()) throw ContractError("msle: node index out of range");
    total += (X_hat_aligned.m().row(i) - X_ref.m().row(i)).norm();
  }
  return total / static_cast<double>(nodes.size());
}

/// All nodes are unknown nodes: Gamma = n.
inline double msle(const CoordinateMatrix& X_hat_aligned,
                   const CoordinateMatrix& X_ref) {
  std::vector<int> all(X_ref.n());
  for (int i = 0; i < X_ref.n(); ++i) all[i] = i;
  return msle(X_hat_aligned, X_ref, all);
}

}  // namespace edmloc
