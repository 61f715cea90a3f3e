#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "drought/core/types.hpp"

namespace drought::net {

// Routing tree over one region's placement; index 0 is the sink.
struct RoutingTree {
  std::vector<std::optional<std::size_t>> parent;
  std::vector<std::vector<std::size_t>> children;
  std::vector<unsigned> depth;

  std::size_t size() const { return parent.size(); }
};

// Breadth-first from the sink: each node adopts up to two of its nearest
// still-unassigned neighbors. Nodes left over (every in-range candidate was
// already full when they were reached) are attached in a repair pass to the
// nearest assigned neighbor with a free slot. Throws OrphanNode if some node
// still cannot be attached.
RoutingTree build_binary_tree(const std::vector<GeoPoint>& positions, double link_range_km);

// Empty when valid; otherwise a description of the first violation.
std::optional<std::string> tree_violation(const RoutingTree& tree, const std::vector<GeoPoint>& positions,
                                          double link_range_km);

}  // namespace drought::net
