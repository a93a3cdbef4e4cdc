#pragma once

#include <string>

#include "edmloc/json_util.hpp"
#include "edmloc/scene.hpp"

namespace edmloc {

inline constexpr int kSceneFormatVersion = 1;

inline Json scene_spec_to_json(const SceneSpec& spec) {
  return Json{{"version", kSceneFormatVersion},
              {"n", spec.n},
              {"k", spec.k},
              {"radio_range", spec.radio_range},
              {"outlier_ratio", spec.outlier_ratio},
              {"outlier_magnitude_max", spec.outlier_magnitude_max},
              {"seed", spec.seed}};
}

inline SceneSpec scene_spec_from_json(const Json& obj, const std::string& where) {
  reject_unknown_fields(obj,
                        {"version", "n", "k", "radio_range", "outlier_ratio",
                         "outlier_magnitude_max", "seed"},
                        where);
  require_version(obj, kSceneFormatVersion, where);
  SceneSpec spec;
  spec.n = optional_field<int>(obj, "n", spec.n, where);
  spec.k = optional_field<int>(obj, "k", spec.k, where);
  spec.radio_range = optional_field<double>(obj, "radio_range", spec.radio_range, where);
  spec.outlier_ratio =
      optional_field<double>(obj, "outlier_ratio", spec.outlier_ratio, where);
  spec.outlier_magnitude_max = optional_field<double>(
      obj, "outlier_magnitude_max", spec.outlier_magnitude_max, where);
  spec.seed = optional_field<std::uint64_t>(obj, "seed", spec.seed, where);
  spec.validate();
  return spec;
}

inline void save_scene(const Scene& scene, const std::string& path) {
  Json obj{{"version", kSceneFormatVersion},
           {"spec", scene_spec_to_json(scene.spec)},
           {"x_true", matrix_to_json(scene.x_true.m())},
           {"d_true", matrix_to_json(scene.d_true.m())},
           {"mask", mask_to_json(scene.mask)},
           {"d_obs", matrix_to_json(scene.d_obs.m())},
           {"l_true", matrix_to_json(scene.l_true.m())}};
  save_json_file(obj, path);
}

/// Loads and fully validates a scene; any invariant violation raises
/// ValidationError.
inline Scene load_scene(const std::string& path) {
  const Json obj = load_json_file(path);
  const std::string where = "scene file " + path;
  reject_unknown_fields(
      obj, {"version", "spec", "x_true", "d_true", "mask", "d_obs", "l_true"}, where);
  require_version(obj, kSceneFormatVersion, where);

  Scene scene;
  if (!obj.contains("spec")) throw ValidationError(where + ": missing spec");
  scene.spec = scene_spec_from_json(obj.at("spec"), where + " (spec)");
  try {
    scene.x_true = CoordinateMatrix(matrix_from_json(
        require_field<Json>(obj, "x_true", where), where + " (x_true)"));
    scene.d_true = SquaredDistanceMatrix(
        matrix_from_json(require_field<Json>(obj, "d_true", where), where + " (d_true)"),
        /*certified_edm=*/true);
    scene.mask = mask_from_json(require_field<Json>(obj, "mask", where), where + " (mask)");
    scene.d_obs = SquaredDistanceMatrix(
        matrix_from_json(require_field<Json>(obj, "d_obs", where), where + " (d_obs)"),
        /*certified_edm=*/false);
    scene.l_true = OutlierMatrix(matrix_from_json(
        require_field<Json>(obj, "l_true", where), where + " (l_true)"));
  } catch (const ContractError& e) {
    throw ValidationError(where + ": " + e.what());
  }

  const auto problems = scene_invariant_violations(scene);
  if (!problems.empty())
    throw ValidationError(where + ": invariant violation: " + problems.front());
  return scene;
}

}  // namespace edmloc
