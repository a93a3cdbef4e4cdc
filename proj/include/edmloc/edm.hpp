#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "edmloc/types.hpp"

namespace edmloc {

/// Squared-distance matrix of a coordinate matrix:
/// D = 1 diag(XX^T)^T + diag(XX^T) 1^T - 2 XX^T, evaluated entrywise on the
/// upper triangle and mirrored so the result is exactly symmetric. Rounding
/// can push an entry a hair below zero; those are clamped to 0 so the output
/// is a certified EDM.
inline SquaredDistanceMatrix edm_from_coords(const CoordinateMatrix& X) {
  const int n = X.n();
  const Matrix& coords = X.m();
  const Vector sq_norms = coords.rowwise().squaredNorm();

  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v = sq_norms(i) + sq_norms(j) - 2.0 * coords.row(i).dot(coords.row(j));
      if (v < 0.0) v = 0.0;
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return SquaredDistanceMatrix(std::move(d), /*certified_edm=*/true);
}

/// Sampling operator P_E: keeps entries on observed pairs, zeroes the rest.
inline Matrix apply_mask(const Matrix& m, const ObservationMask& mask) {
  if (m.rows() != mask.n() || m.cols() != mask.n())
    throw ContractError("apply_mask: matrix is " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + " but mask has n = " +
                        std::to_string(mask.n()));
  return mask.grid().select(m, Matrix::Zero(m.rows(), m.cols()));
}

inline ObservationMask complement_mask(const ObservationMask& mask) {
  return ObservationMask(BoolGrid(!mask.grid()));
}

inline double frobenius_sq(const Matrix& m) { return m.squaredNorm(); }

/// Diagnostic report for the defining properties of a squared-distance matrix.
struct EdmCheckReport {
  bool symmetric = false;
  bool zero_diagonal = false;
  bool nonnegative = false;
  bool rank_bounded = false;
  double max_asymmetry = 0.0;
  double max_diagonal_abs = 0.0;
  double min_entry = 0.0;
  // Largest singular value and the largest one past index k+2.
  double sigma_max = 0.0;
  double sigma_excess = 0.0;

  bool all_pass() const {
    return symmetric && zero_diagonal && nonnegative && rank_bounded;
  }
};

/// Checks symmetry, zero diagonal, nonnegativity, and the rank <= k+2 bound
/// (singular values sigma_{k+3}..sigma_n must not exceed rank_rtol * sigma_1).
/// Takes a raw matrix so that candidate matrices that do not satisfy the
/// SquaredDistanceMatrix invariants can still be diagnosed.
inline EdmCheckReport check_edm_properties(const Matrix& m, int k,
                                           double sym_tol = 1e-9,
                                           double rank_rtol = 1e-8) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw ContractError("check_edm_properties: matrix must be square");
  const int n = static_cast<int>(m.rows());
  EdmCheckReport report;

  report.max_asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  report.symmetric = report.max_asymmetry <= sym_tol;
  report.max_diagonal_abs = m.diagonal().cwiseAbs().maxCoeff();
  report.zero_diagonal = report.max_diagonal_abs == 0.0;
  report.min_entry = m.minCoeff();
  report.nonnegative = report.min_entry >= 0.0;

  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& sigma = svd.singularValues();
  report.sigma_max = sigma(0);
  report.sigma_excess = (n > k + 2) ? sigma(k + 2) : 0.0;
  report.rank_bounded = report.sigma_excess <= rank_rtol * report.sigma_max;
  return report;
}

inline EdmCheckReport check_edm_properties(const SquaredDistanceMatrix& d, int k,
                                           double sym_tol = 1e-9,
                                           double rank_rtol = 1e-8) {
  return check_edm_properties(d.m(), k, sym_tol, rank_rtol);
}

}  // namespace edmloc
