#include "doctest.h"
#include "properties/protocol_checks.hpp"

using namespace drought;

TEST_CASE("protocol properties over random small topologies") {
  const auto r = testing::run_protocol_properties(1200, 20240601);
  for (const auto& f : r.failures) MESSAGE(f);
  MESSAGE("trees built: ", r.trees_built, ", diffusion runs: ", r.diffusion_runs,
          ", reinforced paths to the sink: ", r.reinforced_paths);
  CHECK(r.loop_violations == 0);
  CHECK(r.gradient_violations == 0);
  CHECK(r.idempotence_violations == 0);
  CHECK(r.uniqueness_violations == 0);
  CHECK(r.tree_violations == 0);
  CHECK(r.trees_built > r.topologies / 4);
  CHECK(r.diffusion_runs > r.topologies / 4);
  CHECK(r.reinforced_paths > 0);
}

TEST_CASE("the sweep is deterministic per seed") {
  const auto a = testing::run_protocol_properties(50, 3);
  const auto b = testing::run_protocol_properties(50, 3);
  CHECK(a.trees_built == b.trees_built);
  CHECK(a.reinforced_paths == b.reinforced_paths);
}

TEST_CASE("the brute-force tree oracle agrees with simple shapes") {
  testing::Topology line;
  line.positions = {{0, 0}, {3, 0}, {6, 0}, {9, 0}};
  line.adjacency = coverage::neighbor_lists(line.positions, testing::kPropertyLinkRange);
  CHECK(testing::binary_tree_exists(line));
  // A sink with three leaves that cannot hear each other: no binary tree.
  testing::Topology star;
  star.positions = {{5, 5}, {9, 5}, {1, 5}, {5, 9}};
  star.adjacency = coverage::neighbor_lists(star.positions, testing::kPropertyLinkRange);
  CHECK_FALSE(testing::binary_tree_exists(star));
  CHECK_THROWS_AS(net::build_binary_tree(star.positions, testing::kPropertyLinkRange), OrphanNode);
}
