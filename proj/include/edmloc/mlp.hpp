#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "edmloc/edm.hpp"
#include "edmloc/rng.hpp"
#include "edmloc/types.hpp"

namespace edmloc {

enum class Activation { ReLU };
enum class Optimizer { Adagrad, Sgd };

/// Hyperparameters for the per-instance coordinate network.
struct MlpConfig {
  /// Total number of fully-connected layers (hidden layers plus the linear
  /// output layer). The default 5 means 4 hidden + 1 output.
  int num_fc_layers = 5;
  /// One width per hidden layer; empty means "all equal to n*k".
  std::vector<int> hidden_widths;
  Activation activation = Activation::ReLU;
  double learning_rate = 0.01;
  double adagrad_epsilon = 1e-8;
  /// Inner training iterations T per invocation of train_x_update.
  long inner_iterations = 5000;
  std::uint64_t weight_init_seed = 0;
  Optimizer optimizer = Optimizer::Adagrad;
  /// Reuse the previous outer iteration's parameters instead of
  /// reinitializing the network each time.
  bool warm_start = false;

  void validate() const {
    if (num_fc_layers < 1) throw ConfigError("mlp: num_fc_layers must be positive");
    if (!hidden_widths.empty() &&
        static_cast<int>(hidden_widths.size()) != num_fc_layers - 1)
      throw ConfigError("mlp: hidden_widths must have num_fc_layers - 1 entries");
    for (int w : hidden_widths)
      if (w < 1) throw ConfigError("mlp: hidden widths must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("mlp: learning_rate must be positive");
    if (!(adagrad_epsilon > 0.0))
      throw ConfigError("mlp: adagrad_epsilon must be positive");
    if (inner_iterations < 0)
      throw ConfigError("mlp: inner_iterations must be nonnegative");
  }

  /// Layer widths resolved for an instance: input n*k, hidden widths, output n*k.
  std::vector<int> resolved_widths(int n, int k) const {
    const int io = n * k;
    std::vector<int> widths;
    widths.push_back(io);
    if (hidden_widths.empty()) {
      for (int l = 0; l < num_fc_layers - 1; ++l) widths.push_back(io);
    } else {
      for (int w : hidden_widths) widths.push_back(w);
    }
    widths.push_back(io);
    return widths;
  }
};

struct MlpLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// All trainable parameters. layers[0..m-2] feed the activation, the last
/// layer is linear.
struct MlpParams {
  std::vector<MlpLayer> layers;

  int input_dim() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().weight.rows()); }
};

/// Per-parameter accumulated squared gradients.
struct AdagradState {
  std::vector<MlpLayer> accum;

  static AdagradState zeros_like(const MlpParams& params) {
    AdagradState state;
    for (const auto& layer : params.layers)
      state.accum.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                             Vector::Zero(layer.bias.size())});
    return state;
  }
};

struct MlpGradients {
  std::vector<MlpLayer> layers;
};

/// Fan-in-scaled normal weights (variance 2/fan_in, suited to ReLU), zero
/// biases, deterministic from the seed.
inline MlpParams init_mlp(const MlpConfig& config, int n, int k) {
  config.validate();
  if (n < 1 || k < 1) throw ContractError("init_mlp: n and k must be positive");
  const std::vector<int> widths = config.resolved_widths(n, k);

  std::mt19937_64 engine = make_engine(config.weight_init_seed);
  MlpParams params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / fan_in));
    Matrix w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = init(engine);
    params.layers.push_back({std::move(w), Vector::Zero(fan_out)});
  }
  return params;
}

/// Everything backward needs: the input, each hidden pre-activation and each
/// hidden output, and the network output.
struct ForwardCache {
  Vector input;
  std::vector<Vector> pre_activations;   // one per hidden layer
  std::vector<Vector> hidden_outputs;    // one per hidden layer
  Vector output;
};

inline ForwardCache forward(const MlpParams& params, const Vector& x_in) {
  if (x_in.size() != params.input_dim())
    throw ContractError("forward: input has length " + std::to_string(x_in.size()) +
                        ", network expects " + std::to_string(params.input_dim()));
  ForwardCache cache;
  cache.input = x_in;
  Vector h = x_in;
  const std::size_t num_hidden = params.layers.size() - 1;
  for (std::size_t l = 0; l < num_hidden; ++l) {
    Vector z = params.layers[l].weight * h + params.layers[l].bias;
    cache.pre_activations.push_back(z);
    h = z.cwiseMax(0.0);
    cache.hidden_outputs.push_back(h);
  }
  cache.output = params.layers.back().weight * h + params.layers.back().bias;
  return cache;
}

/// Data-fit loss || h(XX^T) - M ||_F^2 with M symmetrized. The constant
/// tau*||L||_1 part of the training objective does not depend on X and is
/// left out.
inline double loss_x(const CoordinateMatrix& X, const Matrix& M) {
  if (M.rows() != X.n() || M.cols() != X.n())
    throw ContractError("loss_x: target matrix dimension mismatch");
  const Matrix sym = 0.5 * (M + M.transpose());
  return frobenius_sq(edm_from_coords(X).m() - sym);
}

/// Analytic gradient of loss_x with respect to the coordinates:
/// 8 (Diag(R 1) - R) X with R = h(XX^T) - M.
inline Matrix grad_loss_wrt_X(const CoordinateMatrix& X, const Matrix& M) {
  if (M.rows() != X.n() || M.cols() != X.n())
    throw ContractError("grad_loss_wrt_X: target matrix dimension mismatch");
  const Matrix sym = 0.5 * (M + M.transpose());
  const Matrix residual = edm_from_coords(X).m() - sym;
  const Vector row_sums = residual.rowwise().sum();
  return 8.0 * (row_sums.asDiagonal() * X.m() - residual * X.m());
}

/// Backpropagates grad_out (the gradient of a scalar with respect to the
/// network output) through the cached forward pass. The ReLU subgradient at
/// exactly zero is taken as zero.
inline MlpGradients backward(const MlpParams& params, const ForwardCache& cache,
                             const Vector& grad_out) {
  const std::size_t num_hidden = params.layers.size() - 1;
  if (cache.pre_activations.size() != num_hidden ||
      cache.hidden_outputs.size() != num_hidden ||
      cache.input.size() != params.input_dim() ||
      grad_out.size() != params.output_dim())
    throw ContractError("backward: cache does not match network shape");

  MlpGradients grads;
  grads.layers.resize(params.layers.size());

  const Vector& last_hidden =
      num_hidden > 0 ? cache.hidden_outputs.back() : cache.input;
  grads.layers.back().weight = grad_out * last_hidden.transpose();
  grads.layers.back().bias = grad_out;

  Vector delta = params.layers.back().weight.transpose() * grad_out;
  for (std::size_t l = num_hidden; l-- > 0;) {
    const Vector& z = cache.pre_activations[l];
    delta = (z.array() > 0.0).select(delta, Vector::Zero(delta.size()));
    const Vector& below = l > 0 ? cache.hidden_outputs[l - 1] : cache.input;
    grads.layers[l].weight = delta * below.transpose();
    grads.layers[l].bias = delta;
    if (l > 0) delta = params.layers[l].weight.transpose() * delta;
  }
  return grads;
}

/// state += g^2; params -= lr * g / (sqrt(state) + eps), entrywise.
inline void adagrad_step(MlpParams& params, AdagradState& state,
                         const MlpGradients& grads, double lr, double eps) {
  if (state.accum.size() != params.layers.size() ||
      grads.layers.size() != params.layers.size())
    throw ContractError("adagrad_step: shape mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& acc = state.accum[l];
    const auto& g = grads.layers[l];
    acc.weight.array() += g.weight.array().square();
    acc.bias.array() += g.bias.array().square();
    params.layers[l].weight.array() -=
        lr * g.weight.array() / (acc.weight.array().sqrt() + eps);
    params.layers[l].bias.array() -=
        lr * g.bias.array() / (acc.bias.array().sqrt() + eps);
  }
}

inline void sgd_step(MlpParams& params, const MlpGradients& grads, double lr) {
  if (grads.layers.size() != params.layers.size())
    throw ContractError("sgd_step: shape mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    params.layers[l].weight -= lr * grads.layers[l].weight;
    params.layers[l].bias -= lr * grads.layers[l].bias;
  }
}

inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, int rows, int cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

struct XUpdateResult {
  CoordinateMatrix X;
  /// Loss per inner iteration plus one trailing entry for the returned output.
  std::vector<double> loss_trace;
  MlpParams params;
};

/// Trains the network for T iterations against the fixed input vec(X_prev)
/// and target M, then returns the reshaped final output. A fresh network is
/// initialized unless initial_params is supplied (warm start).
inline XUpdateResult train_x_update(const CoordinateMatrix& X_prev, const Matrix& M,
                                    const MlpConfig& config,
                                    std::optional<MlpParams> initial_params = {}) {
  const int n = X_prev.n();
  const int k = X_prev.k();
  if (M.rows() != n || M.cols() != n)
    throw ContractError("train_x_update: target matrix dimension mismatch");

  XUpdateResult result;
  result.params = initial_params ? std::move(*initial_params) : init_mlp(config, n, k);
  if (result.params.input_dim() != n * k || result.params.output_dim() != n * k)
    throw ContractError("train_x_update: network dimensions do not match n*k");

  AdagradState state = AdagradState::zeros_like(result.params);
  const Vector x_in = vec(X_prev.m());
  const Matrix target = 0.5 * (M + M.transpose());

  result.loss_trace.reserve(config.inner_iterations + 1);
  for (long iter = 0; iter < config.inner_iterations; ++iter) {
    ForwardCache cache = forward(result.params, x_in);
    if (!cache.output.allFinite())
      throw TrainingDivergedError("train_x_update: non-finite network output", iter);
    const CoordinateMatrix X_out(unvec(cache.output, n, k));
    const double loss = frobenius_sq(edm_from_coords(X_out).m() - target);
    result.loss_trace.push_back(loss);
    if (!std::isfinite(loss))
      throw TrainingDivergedError("train_x_update: non-finite loss", iter);

    const Matrix grad_x = grad_loss_wrt_X(X_out, target);
    const MlpGradients grads = backward(result.params, cache, vec(grad_x));
    if (config.optimizer == Optimizer::Adagrad)
      adagrad_step(result.params, state, grads, config.learning_rate,
                   config.adagrad_epsilon);
    else
      sgd_step(result.params, grads, config.learning_rate);
  }

  ForwardCache final_pass = forward(result.params, x_in);
  if (!final_pass.output.allFinite())
    throw TrainingDivergedError("train_x_update: non-finite network output",
                                config.inner_iterations);
  result.X = CoordinateMatrix(unvec(final_pass.output, n, k));
  const double final_loss = frobenius_sq(edm_from_coords(result.X).m() - target);
  result.loss_trace.push_back(final_loss);
  if (!std::isfinite(final_loss))
    throw TrainingDivergedError("train_x_update: non-finite final loss",
                                config.inner_iterations);
  return result;
}

}  // namespace edmloc
