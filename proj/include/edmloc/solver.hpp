#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edmloc/edm.hpp"
#include "edmloc/mlp.hpp"
#include "edmloc/scene.hpp"
#include "edmloc/types.hpp"

namespace edmloc {

enum class LUpdateMode { PaperLiteral, ResidualProx };
enum class ThresholdConvention { PaperTau, ExactProxHalfTau };

struct SolverConfig {
  /// l1 regularization weight; unset means "pick 3x the median absolute
  /// observed residual after the first X-update". +infinity freezes L at zero.
  std::optional<double> tau;
  int outer_iterations = 10;
  LUpdateMode l_update_mode = LUpdateMode::ResidualProx;
  ThresholdConvention threshold_convention = ThresholdConvention::PaperTau;
  MlpConfig mlp;
  std::uint64_t x_init_seed = 0;
  /// Early-stop threshold on the relative Frobenius change of D-hat.
  double stop_tol = 1e-6;

  void validate() const {
    if (tau && !(*tau >= 0.0)) throw ConfigError("solver: tau must be nonnegative");
    if (outer_iterations < 0)
      throw ConfigError("solver: outer_iterations must be nonnegative");
    if (!(stop_tol >= 0.0)) throw ConfigError("solver: stop_tol must be nonnegative");
    mlp.validate();
  }
};

struct SolveResult {
  CoordinateMatrix X_hat;
  SquaredDistanceMatrix D_hat;
  OutlierMatrix L_hat;
  /// One entry per completed outer iteration.
  std::vector<double> objective_trace;
  std::vector<double> data_fit_trace;
  std::vector<double> constraint_violation_trace;
  std::vector<std::vector<double>> inner_loss_traces;
  int iterations_run = 0;
  bool converged = false;
  double tau_used = 0.0;
  /// Most negative entry of the returned D-hat (contaminated observations can
  /// push interpolated entries below zero; they are reported, not clamped).
  double min_d_entry = 0.0;
};

struct ObjectiveReport {
  double value = 0.0;
  double data_fit = 0.0;
  double l1_norm = 0.0;
  double constraint_violation = 0.0;
};

/// Constraint violation ||P_E(D + L - D_obs)||_F^2, evaluated as
/// ||P_E(D - (D_obs - L))||_F^2 so that a D produced by update_D — whose
/// observed entries are literally the doubles D_obs - L — measures exactly
/// zero.
inline double constraint_violation(const Matrix& D, const Matrix& L,
                                   const Matrix& D_obs, const ObservationMask& mask) {
  return frobenius_sq(apply_mask(D - (D_obs - L), mask));
}

/// The joint objective ||h(XX^T) - (D + L)||_F^2 + tau ||L||_1, with the
/// constraint violation reported alongside.
inline ObjectiveReport objective(const CoordinateMatrix& X, const Matrix& D,
                                 const Matrix& L, const Matrix& D_obs,
                                 const ObservationMask& mask, double tau) {
  if (D.rows() != X.n() || L.rows() != X.n() || D_obs.rows() != X.n())
    throw ContractError("objective: dimension mismatch");
  ObjectiveReport report;
  report.data_fit = frobenius_sq(edm_from_coords(X).m() - (D + L));
  report.l1_norm = L.cwiseAbs().sum();
  const double tau_term = report.l1_norm == 0.0 ? 0.0 : tau * report.l1_norm;
  report.value = report.data_fit + tau_term;
  report.constraint_violation = constraint_violation(D, L, D_obs, mask);
  return report;
}

/// Closed-form D-update:
/// D = P_E(D_obs) + P_{E^c}(h(X_prev X_prev^T)) - L_prev.
inline SquaredDistanceMatrix update_D(const CoordinateMatrix& X_prev,
                                      const OutlierMatrix& L_prev, const Matrix& D_obs,
                                      const ObservationMask& mask) {
  if (X_prev.n() != mask.n() || L_prev.n() != mask.n() || D_obs.rows() != mask.n())
    throw ContractError("update_D: dimension mismatch");
  Matrix d = apply_mask(D_obs, mask) +
             apply_mask(edm_from_coords(X_prev).m(), complement_mask(mask)) -
             L_prev.m();
  return SquaredDistanceMatrix(std::move(d), /*certified_edm=*/false);
}

/// Soft-thresholding with the threshold applied exactly as the piecewise
/// cases: a - t above t, a + t below -t, zero in between.
inline double soft_threshold(double a, double t) {
  if (a > t) return a - t;
  if (a < -t) return a + t;
  return 0.0;
}

inline double effective_threshold(double tau, ThresholdConvention convention) {
  return convention == ThresholdConvention::ExactProxHalfTau ? 0.5 * tau : tau;
}

/// L-update. PaperLiteral applies the published entrywise solution
/// st(c + L_prev) with c = P_{E^c}(h(X_curr) - h(X_prev)); ResidualProx takes
/// the unconstrained proximal step st(h(X_curr) - D_curr) so the estimate can
/// absorb outliers on observed entries. The result has a zero diagonal and is
/// symmetrized by averaging.
inline OutlierMatrix update_L(const CoordinateMatrix& X_curr,
                              const CoordinateMatrix& X_prev, const Matrix& D_curr,
                              const OutlierMatrix& L_prev, const Matrix& D_obs,
                              const ObservationMask& mask, double tau, LUpdateMode mode,
                              ThresholdConvention convention =
                                  ThresholdConvention::PaperTau) {
  const int n = X_curr.n();
  if (X_prev.n() != n || D_curr.rows() != n || L_prev.n() != n || D_obs.rows() != n ||
      mask.n() != n)
    throw ContractError("update_L: dimension mismatch");
  const double threshold = effective_threshold(tau, convention);

  Matrix raw(n, n);
  if (mode == LUpdateMode::PaperLiteral) {
    const Matrix c = apply_mask(
        edm_from_coords(X_curr).m() - edm_from_coords(X_prev).m(),
        complement_mask(mask));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        raw(i, j) = soft_threshold(c(i, j) + L_prev.m()(i, j), threshold);
  } else {
    const Matrix residual = edm_from_coords(X_curr).m() - D_curr;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) raw(i, j) = soft_threshold(residual(i, j), threshold);
  }

  Matrix result = 0.5 * (raw + raw.transpose());
  result.diagonal().setZero();
  return OutlierMatrix(std::move(result));
}

namespace detail {

inline double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

/// 3x the median absolute value of the nonzero observed residuals
/// P_E(h(X X^T) - D_obs).
inline double auto_tau(const CoordinateMatrix& X, const Matrix& D_obs,
                       const ObservationMask& mask) {
  const Matrix residual = apply_mask(edm_from_coords(X).m() - D_obs, mask);
  std::vector<double> magnitudes;
  magnitudes.reserve(residual.size());
  for (int i = 0; i < residual.rows(); ++i)
    for (int j = 0; j < residual.cols(); ++j)
      if (residual(i, j) != 0.0) magnitudes.push_back(std::abs(residual(i, j)));
  return 3.0 * median_of(std::move(magnitudes));
}

/// Fitting target for the X-update.
///
/// The paper's composition D_i + L_{i-1} is independent of L: substituting
/// the closed-form D-update gives P_E(D_obs) + P_{E^c}(h(X_prev)) for every
/// L, so the coordinate estimate would never see the outlier estimate. In
/// ResidualProx mode the target is therefore the compensated observation
/// matrix P_E(D_obs) + L_prev + P_{E^c}(h(X_prev)): L entries approximate the
/// negated outliers, so adding them cancels the corruption. PaperLiteral mode
/// keeps the published composition.
inline Matrix x_update_target(const Matrix& D_hat, const OutlierMatrix& L_prev,
                              const CoordinateMatrix& X_prev, const Matrix& D_obs,
                              const ObservationMask& mask, LUpdateMode mode) {
  if (mode == LUpdateMode::PaperLiteral) return D_hat + L_prev.m();
  return apply_mask(D_obs, mask) + L_prev.m() +
         apply_mask(edm_from_coords(X_prev).m(), complement_mask(mask));
}

inline SolveResult solve_alternating(const Matrix& D_obs, const ObservationMask& mask,
                                     int n, int k, const SolverConfig& config,
                                     bool update_l) {
  config.validate();
  if (D_obs.rows() != n || D_obs.cols() != n || mask.n() != n)
    throw ContractError("solve: dimension mismatch");
  if (n < 1 || k < 1) throw ContractError("solve: n and k must be positive");

  SolveResult result;
  CoordinateMatrix X_prev = generate_coords(n, k, config.x_init_seed);
  OutlierMatrix L_prev = OutlierMatrix::zero(n);
  std::optional<MlpParams> carried_params;
  std::optional<double> tau = config.tau;
  std::optional<Matrix> previous_d;
  std::optional<SquaredDistanceMatrix> d_hat;

  for (int i = 1; i <= config.outer_iterations; ++i) {
    d_hat = update_D(X_prev, L_prev, D_obs, mask);
    const Matrix target = x_update_target(d_hat->m(), L_prev, X_prev, D_obs, mask,
                                          config.l_update_mode);

    MlpConfig mlp = config.mlp;
    mlp.weight_init_seed = mix_seed(config.mlp.weight_init_seed, i);
    std::optional<MlpParams> warm;
    if (mlp.warm_start) warm = std::move(carried_params);
    XUpdateResult trained = train_x_update(X_prev, target, mlp, std::move(warm));
    if (mlp.warm_start) carried_params = std::move(trained.params);
    result.inner_loss_traces.push_back(std::move(trained.loss_trace));
    CoordinateMatrix X_curr = std::move(trained.X);

    if (update_l && !tau) tau = auto_tau(X_curr, D_obs, mask);

    OutlierMatrix L_curr = L_prev;
    if (update_l) {
      // ResidualProx thresholds the residual against the current model's
      // D-image with no outlier correction, so each L is a fresh estimate
      // rather than an accumulating one.
      const Matrix d_for_l =
          config.l_update_mode == LUpdateMode::PaperLiteral
              ? d_hat->m()
              : update_D(X_curr, OutlierMatrix::zero(n), D_obs, mask).m();
      L_curr = update_L(X_curr, X_prev, d_for_l, L_prev, D_obs, mask, *tau,
                        config.l_update_mode, config.threshold_convention);
    }

    const ObjectiveReport report =
        objective(X_curr, d_hat->m(), L_curr.m(), D_obs, mask, tau.value_or(0.0));
    result.objective_trace.push_back(report.value);
    result.data_fit_trace.push_back(report.data_fit);
    result.constraint_violation_trace.push_back(
        constraint_violation(d_hat->m(), L_prev.m(), D_obs, mask));
    result.iterations_run = i;

    bool stop = false;
    if (previous_d) {
      const double denom = std::max(previous_d->norm(), 1e-300);
      if ((d_hat->m() - *previous_d).norm() / denom < config.stop_tol) {
        result.converged = true;
        stop = true;
      }
    }
    previous_d = d_hat->m();
    X_prev = std::move(X_curr);
    L_prev = std::move(L_curr);
    if (stop) break;
  }

  // Refresh D against the final (X, L) pair so the returned triple satisfies
  // the observed-entry constraint.
  result.D_hat = update_D(X_prev, L_prev, D_obs, mask);
  result.X_hat = std::move(X_prev);
  result.L_hat = std::move(L_prev);
  result.tau_used = tau.value_or(0.0);
  result.min_d_entry = result.D_hat.m().minCoeff();
  return result;
}

}  // namespace detail

/// Full E-MDNL solve: alternating D-update, network X-update, soft-threshold
/// L-update.
inline SolveResult run_emdnl(const Matrix& D_obs, const ObservationMask& mask, int n,
                             int k, const SolverConfig& config) {
  return detail::solve_alternating(D_obs, mask, n, k, config, /*update_l=*/true);
}

inline SolveResult run_emdnl(const Scene& scene, const SolverConfig& config) {
  return run_emdnl(scene.d_obs.m(), scene.mask, scene.spec.n, scene.spec.k, config);
}

/// Baseline MDNL: the same loop with L frozen at zero.
inline SolveResult run_mdnl(const Matrix& D_obs, const ObservationMask& mask, int n,
                            int k, const SolverConfig& config) {
  return detail::solve_alternating(D_obs, mask, n, k, config, /*update_l=*/false);
}

inline SolveResult run_mdnl(const Scene& scene, const SolverConfig& config) {
  return run_mdnl(scene.d_obs.m(), scene.mask, scene.spec.n, scene.spec.k, config);
}

}  // namespace edmloc
