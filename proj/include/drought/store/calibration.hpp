#pragma once

#include <array>
#include <map>

#include "drought/core/types.hpp"

namespace drought::store {

struct AffineMap {
  double gain = 1.0;
  double offset = 0.0;

  double apply(double raw) const { return gain * raw + offset; }
  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

using FieldMaps = std::array<AffineMap, kFieldCount>;

// Fixed raw-to-calibrated map: one affine map per field, optionally replaced
// per node. The identity map is the default.
struct Calibration {
  FieldMaps fields{};
  std::map<NodeId, FieldMaps> per_node;

  SensorReading apply(const SensorReading& raw) const;
  bool is_identity() const;
};

}  // namespace drought::store
