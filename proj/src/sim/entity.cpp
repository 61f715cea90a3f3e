#include "drought/sim/entity.hpp"

namespace drought::sim {

std::string_view entity_kind_name(EntityKind kind) {
  switch (kind) {
    case EntityKind::SensorNode: return "node";
    case EntityKind::LocalBaseStation: return "lbs";
    case EntityKind::RemoteBaseStation: return "rbs";
    case EntityKind::Environment: return "env";
  }
  return "?";
}

std::string to_string(EntityId id) {
  std::string out(entity_kind_name(id.kind));
  out += ':';
  out += std::to_string(id.index);
  return out;
}

}  // namespace drought::sim
