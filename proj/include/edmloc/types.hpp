#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "edmloc/errors.hpp"

namespace edmloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using IndexPair = std::pair<int, int>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// n x k matrix of sensor positions, one row per sensor.
class CoordinateMatrix {
 public:
  CoordinateMatrix() = default;

  explicit CoordinateMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1)
      throw ContractError("CoordinateMatrix requires n >= 1 and k >= 1");
    if (!all_finite(entries_))
      throw ContractError("CoordinateMatrix entries must be finite");
  }

  int n() const { return static_cast<int>(entries_.rows()); }
  int k() const { return static_cast<int>(entries_.cols()); }
  const Matrix& m() const { return entries_; }

  bool operator==(const CoordinateMatrix& other) const {
    return entries_.rows() == other.entries_.rows() &&
           entries_.cols() == other.entries_.cols() && entries_ == other.entries_;
  }

 private:
  Matrix entries_;
};

/// n x n symmetric zero-diagonal matrix of squared pairwise distances.
///
/// `certified_edm` is true only for matrices built by edm_from_coords;
/// observed matrices contaminated by outliers carry false.
class SquaredDistanceMatrix {
 public:
  SquaredDistanceMatrix() = default;

  explicit SquaredDistanceMatrix(Matrix entries, bool certified_edm = false)
      : entries_(std::move(entries)), certified_edm_(certified_edm) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
      throw ContractError("SquaredDistanceMatrix must be square and non-empty");
    if (!all_finite(entries_))
      throw ContractError("SquaredDistanceMatrix entries must be finite");
    if (entries_ != entries_.transpose().eval())
      throw ContractError("SquaredDistanceMatrix must be symmetric");
    if ((entries_.diagonal().array() != 0.0).any())
      throw ContractError("SquaredDistanceMatrix must have a zero diagonal");
    if (certified_edm_ && (entries_.array() < 0.0).any())
      throw ContractError("certified EDM must be entrywise nonnegative");
  }

  int n() const { return static_cast<int>(entries_.rows()); }
  const Matrix& m() const { return entries_; }
  bool certified_edm() const { return certified_edm_; }

  bool operator==(const SquaredDistanceMatrix& other) const {
    return entries_.rows() == other.entries_.rows() && entries_ == other.entries_;
  }

 private:
  Matrix entries_;
  bool certified_edm_ = false;
};

/// Symmetric set of observed index pairs. Masks produced by the observation
/// model always contain the diagonal; derived sets (complements) need not.
class ObservationMask {
 public:
  ObservationMask() = default;

  explicit ObservationMask(BoolGrid observed) : observed_(std::move(observed)) {
    if (observed_.rows() != observed_.cols() || observed_.rows() < 1)
      throw ContractError("ObservationMask must be square and non-empty");
    for (int i = 0; i < observed_.rows(); ++i)
      for (int j = 0; j < i; ++j)
        if (observed_(i, j) != observed_(j, i))
          throw ContractError("ObservationMask must be symmetric");
  }

  /// Mask of size n with every pair observed.
  static ObservationMask full(int n) {
    return ObservationMask(BoolGrid::Constant(n, n, true));
  }

  /// Mask of size n with only the diagonal observed.
  static ObservationMask diagonal_only(int n) {
    BoolGrid g = BoolGrid::Constant(n, n, false);
    for (int i = 0; i < n; ++i) g(i, i) = true;
    return ObservationMask(std::move(g));
  }

  int n() const { return static_cast<int>(observed_.rows()); }
  bool observed(int i, int j) const { return observed_(i, j); }
  const BoolGrid& grid() const { return observed_; }

  bool has_full_diagonal() const {
    for (int i = 0; i < n(); ++i)
      if (!observed_(i, i)) return false;
    return true;
  }

  long count_observed() const {
    long c = 0;
    for (int i = 0; i < n(); ++i)
      for (int j = 0; j < n(); ++j)
        if (observed_(i, j)) ++c;
    return c;
  }

  /// Observed pairs (i, j) with i < j, in row-major order.
  std::vector<IndexPair> upper_offdiag_pairs() const {
    std::vector<IndexPair> pairs;
    for (int i = 0; i < n(); ++i)
      for (int j = i + 1; j < n(); ++j)
        if (observed_(i, j)) pairs.emplace_back(i, j);
    return pairs;
  }

  bool operator==(const ObservationMask& other) const {
    return observed_.rows() == other.observed_.rows() &&
           (observed_ == other.observed_).all();
  }

 private:
  BoolGrid observed_;
};

/// Dense n x n outlier estimate. The support is the set of nonzero entries,
/// recomputed on demand so it can never drift out of sync with the values.
class OutlierMatrix {
 public:
  OutlierMatrix() = default;

  explicit OutlierMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
      throw ContractError("OutlierMatrix must be square and non-empty");
    if (!all_finite(entries_))
      throw ContractError("OutlierMatrix entries must be finite");
  }

  static OutlierMatrix zero(int n) { return OutlierMatrix(Matrix::Zero(n, n)); }

  int n() const { return static_cast<int>(entries_.rows()); }
  const Matrix& m() const { return entries_; }

  std::vector<IndexPair> support() const {
    std::vector<IndexPair> s;
    for (int i = 0; i < n(); ++i)
      for (int j = 0; j < n(); ++j)
        if (entries_(i, j) != 0.0) s.emplace_back(i, j);
    return s;
  }

  long support_size() const {
    long c = 0;
    for (int i = 0; i < n(); ++i)
      for (int j = 0; j < n(); ++j)
        if (entries_(i, j) != 0.0) ++c;
    return c;
  }

  bool is_symmetric() const { return entries_ == entries_.transpose().eval(); }

  bool operator==(const OutlierMatrix& other) const {
    return entries_.rows() == other.entries_.rows() && entries_ == other.entries_;
  }

 private:
  Matrix entries_;
};

}  // namespace edmloc
