#pragma once

#include <compare>
#include <cstdint>

#include "drought/core/types.hpp"
#include "drought/net/packet.hpp"

namespace drought::store {

struct RecordKey {
  RegionId region = 0;
  NodeId node = 0;
  SimTime timestamp;

  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

struct StoredRecord {
  SimTime timestamp;
  NodeId node_id = 0;
  RegionId region_id = 0;
  SensorReading raw;
  SensorReading calibrated;
  net::NodeHealth health;
  GeoPoint location;
  NodeId route_parent = kNoNode;  // tree parent of the source, or the sink's last hop
  std::uint8_t hop_count = 0;

  RecordKey key() const { return {region_id, node_id, timestamp}; }
  friend bool operator==(const StoredRecord&, const StoredRecord&) = default;
};

}  // namespace drought::store
