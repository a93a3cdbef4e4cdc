#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "edmloc/edm.hpp"
#include "edmloc/rng.hpp"
#include "edmloc/types.hpp"

namespace edmloc {

/// Parameters of a synthetic scene: sensors uniform in the unit cube,
/// range-limited observation, a fraction of observed distances replaced by
/// random values.
struct SceneSpec {
  int n = 200;
  int k = 3;
  /// Radio communication range, in distance (not squared-distance) units.
  double radio_range = std::sqrt(3.0);
  double outlier_ratio = 0.0;
  /// Upper bound of the replacement distance draw; <= 0 means "use sqrt(k)",
  /// the diameter of the unit cube.
  double outlier_magnitude_max = 0.0;
  std::uint64_t seed = 0;

  double effective_magnitude_max() const {
    return outlier_magnitude_max > 0.0 ? outlier_magnitude_max
                                       : std::sqrt(static_cast<double>(k));
  }

  void validate() const {
    if (n < 1 || k < 1) throw ConfigError("scene: n and k must be positive");
    if (n < k + 2)
      throw ConfigError("scene: n must be at least k + 2, localization is degenerate");
    if (!(radio_range > 0.0)) throw ConfigError("scene: radio_range must be positive");
    if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0))
      throw ConfigError("scene: outlier_ratio must lie in [0, 1)");
  }

  bool operator==(const SceneSpec&) const = default;
};

struct Scene {
  SceneSpec spec;
  CoordinateMatrix x_true;
  SquaredDistanceMatrix d_true;
  ObservationMask mask;
  SquaredDistanceMatrix d_obs;
  OutlierMatrix l_true;
};

/// i.i.d. Uniform[0,1] coordinates, filled row by row, reproducible from seed.
inline CoordinateMatrix generate_coords(int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 1) throw ContractError("generate_coords: n and k must be positive");
  std::mt19937_64 engine = make_engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix coords(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) coords(i, j) = unit(engine);
  return CoordinateMatrix(std::move(coords));
}

/// RSS observation model: pair (i, j) is observed iff d_ij <= r, i.e. the
/// squared entry is at most r^2 (boundary inclusive). Diagonal always included.
inline ObservationMask observe(const SquaredDistanceMatrix& d_true, double r) {
  if (!(r > 0.0)) throw ContractError("observe: radio range must be positive");
  if (!d_true.certified_edm())
    throw ContractError("observe: D_true must be a certified EDM");
  const int n = d_true.n();
  const double r_sq = r * r;
  BoolGrid grid(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid(i, j) = d_true.m()(i, j) <= r_sq;
  return ObservationMask(std::move(grid));
}

/// Replaces a seed-chosen fraction of observed off-diagonal distances by
/// Uniform(0, magnitude_max) draws (squared before storage) and defines
/// L_true as the induced difference, so D_obs = P_E(D_true + L_true) exactly.
inline std::pair<SquaredDistanceMatrix, OutlierMatrix> inject_outliers(
    const SquaredDistanceMatrix& d_true, const ObservationMask& mask, double rho,
    double magnitude_max, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw ContractError("inject_outliers: outlier ratio must lie in [0, 1)");
  if (rho > 0.0 && !(magnitude_max > 0.0))
    throw ContractError("inject_outliers: magnitude_max must be positive");
  if (d_true.n() != mask.n())
    throw ContractError("inject_outliers: dimension mismatch");
  const int n = d_true.n();

  Matrix d_obs = apply_mask(d_true.m(), mask);
  Matrix l_true = Matrix::Zero(n, n);

  std::vector<IndexPair> candidates = mask.upper_offdiag_pairs();
  const long num_outliers = std::llround(rho * static_cast<double>(candidates.size()));

  std::mt19937_64 engine = make_engine(seed);
  // Partial Fisher-Yates: the first num_outliers slots become the sample.
  for (long t = 0; t < num_outliers; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, candidates.size() - 1);
    std::swap(candidates[t], candidates[pick(engine)]);
  }
  std::vector<IndexPair> chosen(candidates.begin(), candidates.begin() + num_outliers);
  std::sort(chosen.begin(), chosen.end());

  std::uniform_real_distribution<double> magnitude(0.0, magnitude_max);
  for (const auto& [i, j] : chosen) {
    double corrupted;
    do {
      const double u = magnitude(engine);
      corrupted = u * u;
    } while (corrupted == d_true.m()(i, j));  // keep the support count exact
    d_obs(i, j) = corrupted;
    d_obs(j, i) = corrupted;
    l_true(i, j) = corrupted - d_true.m()(i, j);
    l_true(j, i) = l_true(i, j);
  }

  return {SquaredDistanceMatrix(std::move(d_obs), /*certified_edm=*/false),
          OutlierMatrix(std::move(l_true))};
}

/// Deterministic end-to-end generation: coordinates from spec.seed, outlier
/// placement and magnitudes from a derived stream.
inline Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.spec = spec;
  scene.x_true = generate_coords(spec.n, spec.k, spec.seed);
  scene.d_true = edm_from_coords(scene.x_true);
  scene.mask = observe(scene.d_true, spec.radio_range);
  auto [d_obs, l_true] =
      inject_outliers(scene.d_true, scene.mask, spec.outlier_ratio,
                      spec.effective_magnitude_max(), mix_seed(spec.seed, 1));
  scene.d_obs = std::move(d_obs);
  scene.l_true = std::move(l_true);
  return scene;
}

/// Checks every documented Scene invariant; returns a list of violations
/// (empty means valid).
inline std::vector<std::string> scene_invariant_violations(const Scene& scene) {
  std::vector<std::string> problems;
  const int n = scene.spec.n;

  if (scene.x_true.n() != n || scene.x_true.k() != scene.spec.k)
    problems.push_back("x_true dimensions disagree with spec");
  if (scene.d_true.n() != n || scene.d_obs.n() != n || scene.mask.n() != n ||
      scene.l_true.n() != n) {
    problems.push_back("matrix dimensions disagree with spec");
    return problems;  // further checks would misindex
  }

  if (!scene.mask.has_full_diagonal())
    problems.push_back("mask is missing diagonal pairs");

  const ObservationMask comp = complement_mask(scene.mask);
  if (apply_mask(scene.d_obs.m(), comp).cwiseAbs().maxCoeff() != 0.0)
    problems.push_back("d_obs has nonzero entries outside the mask");

  const Matrix decomposition =
      apply_mask(scene.d_obs.m() - scene.d_true.m() - scene.l_true.m(), scene.mask);
  if (decomposition.cwiseAbs().maxCoeff() != 0.0)
    problems.push_back("observed entries do not decompose as d_true + l_true");

  if (!scene.l_true.is_symmetric()) problems.push_back("l_true is not symmetric");
  if (scene.l_true.m().diagonal().cwiseAbs().maxCoeff() != 0.0)
    problems.push_back("l_true has nonzero diagonal entries");
  for (const auto& [i, j] : scene.l_true.support())
    if (!scene.mask.observed(i, j)) {
      problems.push_back("l_true support extends outside the mask");
      break;
    }

  long upper_support = 0;
  for (const auto& [i, j] : scene.l_true.support())
    if (i < j) ++upper_support;
  const long expected = std::llround(scene.spec.outlier_ratio *
                                     static_cast<double>(scene.mask.upper_offdiag_pairs().size()));
  if (upper_support != expected)
    problems.push_back("outlier count is " + std::to_string(upper_support) +
                       ", expected " + std::to_string(expected));

  return problems;
}

}  // namespace edmloc
