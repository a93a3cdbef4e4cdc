#pragma once

#include <limits>
#include <string>

#include "edmloc/harness.hpp"
#include "edmloc/json_util.hpp"
#include "edmloc/scene_io.hpp"
#include "edmloc/solver.hpp"

namespace edmloc {

inline constexpr int kConfigFormatVersion = 1;

inline MlpConfig mlp_config_from_json(const Json& obj, const std::string& where) {
  reject_unknown_fields(obj,
                        {"num_fc_layers", "hidden_widths", "activation",
                         "learning_rate", "adagrad_epsilon", "inner_iterations",
                         "weight_init_seed", "optimizer", "warm_start"},
                        where);
  MlpConfig config;
  config.num_fc_layers =
      optional_field<int>(obj, "num_fc_layers", config.num_fc_layers, where);
  config.hidden_widths = optional_field<std::vector<int>>(
      obj, "hidden_widths", config.hidden_widths, where);
  const std::string activation =
      optional_field<std::string>(obj, "activation", "relu", where);
  if (activation != "relu")
    throw ConfigError(where + ": unknown activation \"" + activation + "\"");
  config.learning_rate =
      optional_field<double>(obj, "learning_rate", config.learning_rate, where);
  config.adagrad_epsilon =
      optional_field<double>(obj, "adagrad_epsilon", config.adagrad_epsilon, where);
  config.inner_iterations =
      optional_field<long>(obj, "inner_iterations", config.inner_iterations, where);
  config.weight_init_seed = optional_field<std::uint64_t>(
      obj, "weight_init_seed", config.weight_init_seed, where);
  const std::string optimizer =
      optional_field<std::string>(obj, "optimizer", "adagrad", where);
  if (optimizer == "adagrad")
    config.optimizer = Optimizer::Adagrad;
  else if (optimizer == "sgd")
    config.optimizer = Optimizer::Sgd;
  else
    throw ConfigError(where + ": unknown optimizer \"" + optimizer + "\"");
  config.warm_start = optional_field<bool>(obj, "warm_start", config.warm_start, where);
  config.validate();
  return config;
}

inline Json mlp_config_to_json(const MlpConfig& config) {
  return Json{{"num_fc_layers", config.num_fc_layers},
              {"hidden_widths", config.hidden_widths},
              {"activation", "relu"},
              {"learning_rate", config.learning_rate},
              {"adagrad_epsilon", config.adagrad_epsilon},
              {"inner_iterations", config.inner_iterations},
              {"weight_init_seed", config.weight_init_seed},
              {"optimizer", config.optimizer == Optimizer::Adagrad ? "adagrad" : "sgd"},
              {"warm_start", config.warm_start}};
}

/// Solver method requested in a solve configuration.
enum class SolveMethod { EMDNL, MDNL };

struct NamedSolverConfig {
  SolverConfig solver;
  SolveMethod method = SolveMethod::EMDNL;
};

inline SolverConfig solver_config_from_json(const Json& obj, const std::string& where,
                                            SolveMethod* method_out = nullptr) {
  reject_unknown_fields(obj,
                        {"version", "tau", "outer_iterations", "l_update_mode",
                         "threshold_convention", "stop_tol", "x_init_seed", "mlp",
                         "method"},
                        where);
  if (obj.contains("version")) require_version(obj, kConfigFormatVersion, where);

  SolverConfig config;
  if (obj.contains("tau")) {
    const Json& tau = obj.at("tau");
    if (tau.is_string()) {
      const std::string s = tau.get<std::string>();
      if (s == "auto")
        config.tau.reset();
      else if (s == "infinity" || s == "inf")
        config.tau = std::numeric_limits<double>::infinity();
      else
        throw ConfigError(where + ": tau must be a number, \"auto\", or \"infinity\"");
    } else if (tau.is_number()) {
      config.tau = tau.get<double>();
    } else {
      throw ConfigError(where + ": tau must be a number, \"auto\", or \"infinity\"");
    }
  }
  config.outer_iterations =
      optional_field<int>(obj, "outer_iterations", config.outer_iterations, where);

  const std::string mode =
      optional_field<std::string>(obj, "l_update_mode", "residual_prox", where);
  if (mode == "residual_prox")
    config.l_update_mode = LUpdateMode::ResidualProx;
  else if (mode == "paper_literal")
    config.l_update_mode = LUpdateMode::PaperLiteral;
  else
    throw ConfigError(where + ": unknown l_update_mode \"" + mode + "\"");

  const std::string convention =
      optional_field<std::string>(obj, "threshold_convention", "paper_tau", where);
  if (convention == "paper_tau")
    config.threshold_convention = ThresholdConvention::PaperTau;
  else if (convention == "exact_prox_half_tau")
    config.threshold_convention = ThresholdConvention::ExactProxHalfTau;
  else
    throw ConfigError(where + ": unknown threshold_convention \"" + convention + "\"");

  config.stop_tol = optional_field<double>(obj, "stop_tol", config.stop_tol, where);
  config.x_init_seed =
      optional_field<std::uint64_t>(obj, "x_init_seed", config.x_init_seed, where);
  if (obj.contains("mlp"))
    config.mlp = mlp_config_from_json(obj.at("mlp"), where + " (mlp)");

  const std::string method = optional_field<std::string>(obj, "method", "emdnl", where);
  if (method_out) {
    if (method == "emdnl")
      *method_out = SolveMethod::EMDNL;
    else if (method == "mdnl")
      *method_out = SolveMethod::MDNL;
    else
      throw ConfigError(where + ": unknown method \"" + method + "\"");
  }

  config.validate();
  return config;
}

inline ExperimentConfig experiment_config_from_json(const Json& obj,
                                                    const std::string& where) {
  reject_unknown_fields(obj,
                        {"version", "scene", "solver", "num_trials", "outlier_ratios",
                         "methods", "seed_base"},
                        where);
  require_version(obj, kConfigFormatVersion, where);
  ExperimentConfig config;
  if (obj.contains("scene"))
    config.scene_spec = scene_spec_from_json(obj.at("scene"), where + " (scene)");
  if (obj.contains("solver"))
    config.solver = solver_config_from_json(obj.at("solver"), where + " (solver)");
  config.num_trials = optional_field<int>(obj, "num_trials", config.num_trials, where);
  config.outlier_ratios = optional_field<std::vector<double>>(
      obj, "outlier_ratios", config.outlier_ratios, where);
  if (obj.contains("methods")) {
    config.methods.clear();
    for (const auto& entry : obj.at("methods")) {
      if (!entry.is_string())
        throw ConfigError(where + ": methods must be strings");
      const std::string name = entry.get<std::string>();
      if (name == "emdnl")
        config.methods.push_back(Method::EMDNL);
      else if (name == "mdnl")
        config.methods.push_back(Method::MDNL);
      else
        throw ConfigError(where + ": unknown method \"" + name + "\"");
    }
  }
  config.seed_base =
      optional_field<std::uint64_t>(obj, "seed_base", config.seed_base, where);
  config.validate();
  return config;
}

}  // namespace edmloc
