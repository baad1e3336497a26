#pragma once

#include <json.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace scenecomp {

using Json = nlohmann::json;

// JSON has no infinities; extents use them for unbounded planes, so encode
// them as strings.
inline Json json_real(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

inline double real_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::runtime_error("expected a number, got string '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace scenecomp
