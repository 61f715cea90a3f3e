#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace drought::sim {

enum class EntityKind : std::uint8_t {
  SensorNode = 0,
  LocalBaseStation = 1,
  RemoteBaseStation = 2,
  Environment = 3,
};

inline constexpr std::size_t kEntityKindCount = 4;

std::string_view entity_kind_name(EntityKind kind);

struct EntityId {
  EntityKind kind = EntityKind::SensorNode;
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(const EntityId&, const EntityId&) = default;
};

inline EntityId sensor_node(std::uint32_t index) { return {EntityKind::SensorNode, index}; }
inline EntityId local_base_station(std::uint32_t index) { return {EntityKind::LocalBaseStation, index}; }
inline EntityId remote_base_station(std::uint32_t index = 0) { return {EntityKind::RemoteBaseStation, index}; }

// "kind:index", the form used in event traces.
std::string to_string(EntityId id);

}  // namespace drought::sim

template <>
struct std::hash<drought::sim::EntityId> {
  std::size_t operator()(const drought::sim::EntityId& id) const noexcept {
    return (static_cast<std::size_t>(id.kind) << 32) ^ id.index;
  }
};
