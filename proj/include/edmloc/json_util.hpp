#pragma once

#include <json.hpp>

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "edmloc/types.hpp"

namespace edmloc {

using Json = nlohmann::json;

/// Rejects any key not in `allowed` so that a typo cannot silently change an
/// experiment. `where` names the object in the diagnostic.
inline void reject_unknown_fields(const Json& obj, const std::set<std::string>& allowed,
                                  const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError(where + ": unknown field \"" + key + "\"");
}

template <typename T>
T require_field(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing field \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + ": field \"" + key + "\" has the wrong type");
  }
}

template <typename T>
T optional_field(const Json& obj, const std::string& key, T fallback,
                 const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + ": field \"" + key + "\" has the wrong type");
  }
}

inline void require_version(const Json& obj, int expected, const std::string& where) {
  const int v = require_field<int>(obj, "version", where);
  if (v != expected)
    throw ValidationError(where + ": unsupported version " + std::to_string(v) +
                          " (expected " + std::to_string(expected) + ")");
}

inline Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const Json& obj, const std::string& where) {
  reject_unknown_fields(obj, {"rows", "cols", "data"}, where);
  const long rows = require_field<long>(obj, "rows", where);
  const long cols = require_field<long>(obj, "cols", where);
  const auto data = require_field<std::vector<double>>(obj, "data", where);
  if (rows < 1 || cols < 1)
    throw ValidationError(where + ": dimensions must be positive");
  if (static_cast<long>(data.size()) != rows * cols)
    throw ValidationError(where + ": data length does not match rows*cols");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = data[i * cols + j];
  return m;
}

/// Masks are stored as the sorted list of observed strictly-upper pairs with
/// 0-based indices; symmetry and the diagonal are implied.
inline Json mask_to_json(const ObservationMask& mask) {
  Json pairs = Json::array();
  for (const auto& [i, j] : mask.upper_offdiag_pairs())
    pairs.push_back(Json::array({i, j}));
  return Json{{"n", mask.n()}, {"pairs", std::move(pairs)}};
}

inline ObservationMask mask_from_json(const Json& obj, const std::string& where) {
  reject_unknown_fields(obj, {"n", "pairs"}, where);
  const int n = require_field<int>(obj, "n", where);
  if (n < 1) throw ValidationError(where + ": n must be positive");
  if (!obj.contains("pairs") || !obj.at("pairs").is_array())
    throw ValidationError(where + ": missing pair list");

  BoolGrid grid = BoolGrid::Constant(n, n, false);
  for (int i = 0; i < n; ++i) grid(i, i) = true;
  for (const auto& entry : obj.at("pairs")) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() ||
        !entry[1].is_number_integer())
      throw ValidationError(where + ": pair entries must be [i, j] integer arrays");
    const int i = entry[0].get<int>();
    const int j = entry[1].get<int>();
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw ValidationError(where + ": pair index out of range");
    if (i >= j)
      throw ValidationError(where + ": pairs must be strictly upper-triangular (i < j)");
    grid(i, j) = true;
    grid(j, i) = true;
  }
  return ObservationMask(std::move(grid));
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Json obj;
  try {
    in >> obj;
  } catch (const Json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return obj;
}

inline void save_json_file(const Json& obj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << obj.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace edmloc
