#include "drought/store/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace drought::store {

SensorReading Calibration::apply(const SensorReading& raw) const {
  const auto it = per_node.find(raw.node_id);
  const FieldMaps& maps = it != per_node.end() ? it->second : fields;
  SensorReading out = raw;
  for (Field f : kAllFields) {
    out.values.set(f, maps[static_cast<std::size_t>(f)].apply(raw.values.get(f)));
  }
  double dir = std::fmod(out.values.wind_dir_deg, 360.0);
  if (dir < 0.0) dir += 360.0;
  out.values.wind_dir_deg = dir >= 360.0 ? 0.0 : dir;
  out.values.precipitation_mm = std::max(0.0, out.values.precipitation_mm);
  out.values.humidity_pct = std::clamp(out.values.humidity_pct, 0.0, 100.0);
  return out;
}

bool Calibration::is_identity() const {
  const AffineMap id{};
  return per_node.empty() && std::all_of(fields.begin(), fields.end(), [&](const AffineMap& m) { return m == id; });
}

}  // namespace drought::store
