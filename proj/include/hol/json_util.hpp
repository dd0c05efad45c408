#pragma once

#include <cmath>
#include <string>

#include "hol/extreal.hpp"
#include "json.hpp"

namespace hol {

/// Numbers with +inf written as the string "inf" (JSON has no infinity).
inline nlohmann::json num_json(double x) {
  if (std::isinf(x)) return x > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
  if (std::isnan(x)) return nlohmann::json("nan");
  return nlohmann::json(x);
}

inline double num_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -kInf;
    return parse_extended(s);
  }
  return j.get<double>();
}

}  // namespace hol
