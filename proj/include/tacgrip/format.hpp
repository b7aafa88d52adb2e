// Locale-independent number formatting shared by the CSV writers.
#pragma once

#include <cstdio>
#include <string>

namespace tacgrip {

/// Shortest round-trippable-enough text for a double (%.10g).
inline std::string fmt_num(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", value == 0.0 ? 0.0 : value);
  return buf;
}

}  // namespace tacgrip
