// Debug export for tactile frames and contact patches.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "tacgrip/format.hpp"
#include "tacgrip/gel_contact.hpp"

namespace tacgrip::gel {

/// Binary 16-bit PGM (P5, big-endian), depth in micrometers.
inline void write_pgm(std::ostream& out, const TactileFrame& frame) {
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n65535\n";
  for (double d : frame.depth) {
    const auto um = static_cast<std::uint16_t>(std::clamp(std::lround(d * 1000.0), 0L, 65535L));
    const char bytes[2] = {static_cast<char>(um >> 8), static_cast<char>(um & 0xff)};
    out.write(bytes, 2);
  }
}

inline constexpr const char* kPatchCsvHeader = "tick,area_px,edge_offset_mm,edge_angle_rad";

/// Edge columns are left empty when no edge exists.
inline std::string patch_csv_row(std::int64_t tick, const ContactPatch& patch) {
  std::string row = std::to_string(tick) + ',' + std::to_string(patch.area) + ',';
  if (patch.edge) {
    row += fmt_num(patch.edge->offset_mm) + ',' + fmt_num(patch.edge->angle_rad);
  } else {
    row += ',';
  }
  return row;
}

}  // namespace tacgrip::gel
