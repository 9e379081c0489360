#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psps/milp.hpp"

namespace psps::detail {

struct ModelStamp {
  int horizon = 0;
  int scenarios = 0;
};

/* Model names carry a ":h<H>:w<W>" suffix so downstream passes can recover
 * the block structure without the builder inputs. */
inline std::string stamp_name(const std::string& case_name, int horizon, int scenarios) {
  return "psps:" + case_name + ":h" + std::to_string(horizon) + ":w" + std::to_string(scenarios);
}

inline std::optional<ModelStamp> read_stamp(const MilpModel& m) {
  const std::string& s = m.name;
  const auto wpos = s.rfind(":w");
  if (wpos == std::string::npos) return std::nullopt;
  const auto hpos = s.rfind(":h", wpos);
  if (hpos == std::string::npos || hpos >= wpos) return std::nullopt;
  auto digits = [](const std::string& part) {
    if (part.empty() || part.size() > 7) return -1;
    int v = 0;
    for (char ch : part) {
      if (ch < '0' || ch > '9') return -1;
      v = v * 10 + (ch - '0');
    }
    return v;
  };
  const int h = digits(s.substr(hpos + 2, wpos - hpos - 2));
  const int w = digits(s.substr(wpos + 2));
  if (h < 1 || w < 1) return std::nullopt;
  return ModelStamp{h, w};
}

inline std::string join_lines(const std::vector<std::string>& msgs) {
  std::string out;
  for (const auto& msg : msgs) {
    if (!out.empty()) out += '\n';
    out += msg;
  }
  return out;
}

}  // namespace psps::detail
