#include <cmath>
#include <numbers>

#include "doctest.h"
#include "drought/coverage/planner.hpp"
#include "drought/errors.hpp"
#include "drought/sim/rng.hpp"

using namespace drought;
using namespace drought::coverage;

namespace {

const Rect kRegion1{{0.0, 90.0}, {10.0, 100.0}};

double rel_err(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

}  // namespace

TEST_CASE("footprint areas match the closed forms") {
  CHECK(footprint_area(CellShape::Circle, 1.0) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  for (double r : {0.3, 1.0, 1.8, 2.074, 7.5}) {
    CHECK(rel_err(footprint_area(CellShape::Hexagon, r), 3.0 * std::sqrt(3.0) / 2.0 * r * r) < 1e-9);
    CHECK(rel_err(footprint_area(CellShape::Circle, r), std::numbers::pi * r * r) < 1e-9);
    CHECK(rel_err(footprint_area(CellShape::Square, r), 2.0 * r * r) < 1e-9);
    CHECK(rel_err(footprint_area(CellShape::EquilateralTriangle, r),
                  3.0 * std::sqrt(3.0) / 4.0 * r * r) < 1e-9);
  }
}

TEST_CASE("footprints reproduce the stated circle and hexagon areas") {
  CHECK(rel_err(footprint_area(CellShape::Circle, 1.80), 10.18) < 0.005);
  CHECK(rel_err(footprint_area(CellShape::Hexagon, 2.074), 11.17) < 0.005);
}

TEST_CASE("non-positive range is rejected") {
  CHECK_THROWS_AS(footprint_area(CellShape::Hexagon, 0.0), NonPositiveRange);
  CHECK_THROWS_AS(footprint_area(CellShape::Circle, -1.0), NonPositiveRange);
  CHECK_THROWS_AS(estimate_node_count(100.0, CellShape::Square, 0.0), NonPositiveRange);
}

TEST_CASE("node count estimates") {
  CHECK(estimate_node_count(100.0, CellShape::Hexagon, 2.074) == 9);
  CHECK(estimate_node_count(100.0, CellShape::Hexagon, 2.074) + 1 == 10);
  CHECK(estimate_node_count(100.0, CellShape::Circle, 1.80) == 10);
  CHECK(estimate_node_count(11.17, CellShape::Hexagon, 2.074) == 1);
}

TEST_CASE("node count is antitone in radio range") {
  sim::RngStream rng(3, "antitone");
  for (int i = 0; i < 2000; ++i) {
    const double area = 1.0 + rng.uniform01() * 500.0;
    const double r1 = 0.1 + rng.uniform01() * 5.0;
    const double r2 = r1 + rng.uniform01() * 5.0;
    for (auto shape : {CellShape::Circle, CellShape::Square, CellShape::EquilateralTriangle,
                       CellShape::Hexagon}) {
      CHECK(estimate_node_count(area, shape, r2) <= estimate_node_count(area, shape, r1));
    }
  }
}

TEST_CASE("hexagon tiling of 10 nodes sits on the lattice inside the region") {
  const PlacementPlan plan = tile_region(1, kRegion1, CellShape::Hexagon, 2.074, 10);
  REQUIRE(plan.node_positions.size() == 10);
  CHECK(plan.sink_position == plan.node_positions[0]);
  // Sink cell contains the centroid.
  CHECK(distance_km(plan.sink_position, kRegion1.centroid()) <= 2.074);

  const double a = std::sqrt(3.0) * 2.074;
  for (std::size_t i = 0; i < plan.node_positions.size(); ++i) {
    CHECK(kRegion1.contains(plan.node_positions[i]));
    double nearest = 1e9;
    for (std::size_t j = 0; j < plan.node_positions.size(); ++j) {
      if (i == j) continue;
      const double d = distance_km(plan.node_positions[i], plan.node_positions[j]);
      nearest = std::min(nearest, d);
      // Hex lattice distances satisfy (d/a)^2 = i^2 + ij + j^2, an integer.
      const double q = (d / a) * (d / a);
      CHECK(std::fabs(q - std::round(q)) < 1e-6);
    }
    CHECK(nearest == doctest::Approx(a).epsilon(1e-9));
  }
  CHECK(a == doctest::Approx(3.592).epsilon(1e-3));
}

TEST_CASE("single-node placement is the sink at the centroid") {
  const PlacementPlan plan = tile_region(1, kRegion1, CellShape::Hexagon, 2.074, 1);
  REQUIRE(plan.node_positions.size() == 1);
  CHECK(plan.sink_position.x_km == doctest::Approx(5.0));
  CHECK(plan.sink_position.y_km == doctest::Approx(95.0));
}

TEST_CASE("tile_region error paths") {
  CHECK_THROWS_AS(tile_region(1, kRegion1, CellShape::Circle, 1.8, 10), UntileableShape);
  CHECK_THROWS_AS(tile_region(1, kRegion1, CellShape::Hexagon, 2.074, 0), InsufficientNodes);
  CHECK_THROWS_AS(tile_region(1, kRegion1, CellShape::Hexagon, 2.074, 500), PlacementInfeasible);
}

TEST_CASE("square and triangle tilings place nodes on their lattices") {
  for (auto shape : {CellShape::Square, CellShape::EquilateralTriangle}) {
    const PlacementPlan plan = tile_region(2, kRegion1, shape, 1.5, 12);
    CHECK(plan.node_positions.size() == 12);
    const double spacing = lattice_spacing(shape, 1.5);
    for (std::size_t i = 0; i < plan.node_positions.size(); ++i) {
      CHECK(kRegion1.contains(plan.node_positions[i]));
      for (std::size_t j = i + 1; j < plan.node_positions.size(); ++j) {
        CHECK(distance_km(plan.node_positions[i], plan.node_positions[j]) >= spacing - 1e-9);
      }
    }
    CHECK(connectivity_check(plan).connected);
  }
}

TEST_CASE("hexagonal tiling leaves no point of a rectangle uncovered") {
  sim::RngStream rng(17, "hex-cover");
  for (int trial = 0; trial < 4; ++trial) {
    const double r = 0.5 + rng.uniform01() * 2.5;
    const Rect rect{{rng.uniform01() * 10, rng.uniform01() * 10},
                    {20 + rng.uniform01() * 10, 15 + rng.uniform01() * 10}};
    const GeoPoint origin{rng.uniform01() * 40 - 10, rng.uniform01() * 40 - 10};
    const auto centers = lattice_centers(CellShape::Hexagon, r, origin, rect);
    int uncovered = 0;
    for (int i = 0; i < 25'000; ++i) {
      const GeoPoint p{rect.min.x_km + rng.uniform01() * rect.width(),
                       rect.min.y_km + rng.uniform01() * rect.height()};
      double best = 1e300;
      for (const auto& c : centers) best = std::min(best, distance_km(p, c));
      if (best > r + 1e-9) ++uncovered;
    }
    CHECK(uncovered == 0);
  }
}

TEST_CASE("connectivity check") {
  SUBCASE("hex plan of 10 reaches the sink (BFS oracle)") {
    const PlacementPlan plan = tile_region(1, kRegion1, CellShape::Hexagon, 2.074, 10);
    const auto report = connectivity_check(plan);
    CHECK(report.connected);
    CHECK(report.all_reach_sink);
    CHECK(report.components == 1);
  }
  SUBCASE("two nodes 100 km apart with 2 km range are disconnected") {
    PlacementPlan plan;
    plan.radio_range_km = 2.0;
    plan.node_positions = {{0.0, 0.0}, {100.0, 0.0}};
    const auto report = connectivity_check(plan);
    CHECK_FALSE(report.connected);
    CHECK(report.unreachable == std::vector<std::size_t>{1});
  }
  SUBCASE("a single node is trivially connected") {
    PlacementPlan plan;
    plan.radio_range_km = 2.0;
    plan.node_positions = {{5.0, 5.0}};
    CHECK(connectivity_check(plan).connected);
  }
}

TEST_CASE("placement json carries the sink flag") {
  const auto plan = tile_region(3, {{45, 45}, {55, 55}}, CellShape::Hexagon, 2.074, 10);
  const auto j = to_json(plan);
  CHECK(j["region_id"] == 3);
  CHECK(j["shape"] == "hexagon");
  CHECK(j["nodes"].size() == 10);
  CHECK(j["nodes"][0]["is_sink"] == true);
  CHECK(j["nodes"][1]["is_sink"] == false);
}
