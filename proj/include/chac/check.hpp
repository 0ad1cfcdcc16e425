#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace chac {

/// One verification record: a named check with its fitted quantities and a
/// pass flag, emitted as a single JSON object per line.
struct CheckRecord {
  std::string name;
  bool pass = false;
  bool inconclusive = false;
  nlohmann::json details;

  nlohmann::json to_json() const {
    nlohmann::json j = details;
    j["check"] = name;
    j["pass"] = pass;
    if (inconclusive) j["inconclusive"] = true;
    return j;
  }
};

inline int suite_exit_code(const std::vector<CheckRecord>& records) {
  bool any_fail = false, any_inconclusive = false;
  for (const auto& r : records) {
    if (!r.pass) any_fail = true;
    if (r.inconclusive) any_inconclusive = true;
  }
  if (any_fail) return 1;
  if (any_inconclusive) return 2;
  return 0;
}

}  // namespace chac
