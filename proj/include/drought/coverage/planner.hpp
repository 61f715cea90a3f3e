#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drought/core/types.hpp"

namespace drought::coverage {

enum class CellShape { Circle, Square, EquilateralTriangle, Hexagon };

std::string_view shape_name(CellShape shape);
std::optional<CellShape> parse_shape(std::string_view name);

// Area of one cell. For Circle the range is the disc radius; for the
// polygons it is the circumradius of the polygon inscribed in the radio disc.
double footprint_area(CellShape shape, double radio_range_km);

// ceil(region_area / footprint_area): sensing cells only, the sink is extra.
std::size_t estimate_node_count(double region_area_km2, CellShape shape, double radio_range_km);

// Distance between centers of two cells sharing an edge.
double lattice_spacing(CellShape shape, double radio_range_km);

// All cell centers of the shape's tiling, anchored so that `origin` is a
// center, whose cells can intersect `bounds`. Circle is rejected.
std::vector<GeoPoint> lattice_centers(CellShape shape, double radio_range_km, GeoPoint origin,
                                      const Rect& bounds);

struct PlacementPlan {
  RegionId region_id = 0;
  CellShape cell_shape = CellShape::Hexagon;
  double radio_range_km = 0.0;
  Rect area;
  // Index 0 is always the sink.
  std::vector<GeoPoint> node_positions;
  GeoPoint sink_position;

  // Nodes are neighbors iff their distance is at most this.
  double link_range_km() const { return 2.0 * radio_range_km; }
};

// Places node_count nodes (sink included) on lattice centers inside `area`.
// Among lattice offsets that fit node_count centers, the one whose nearest
// center is closest to the area centroid wins; positions are the node_count
// centers nearest the centroid and the sink takes the first of them.
PlacementPlan tile_region(RegionId region_id, const Rect& area, CellShape shape,
                          double radio_range_km, std::size_t node_count);

struct ConnectivityReport {
  bool connected = false;
  bool all_reach_sink = false;
  std::size_t components = 0;
  std::vector<std::size_t> unreachable;  // node indices without a path to the sink
};

ConnectivityReport connectivity_check(const PlacementPlan& plan);

// Unit-disc neighbor lists by node index (edge iff distance <= link range).
std::vector<std::vector<std::size_t>> neighbor_lists(const std::vector<GeoPoint>& positions,
                                                     double link_range_km);

nlohmann::json to_json(const PlacementPlan& plan);

// Five 10 km x 10 km sub-networks on the 100 km x 100 km map: the four
// corners plus the center. Anchors are square centroids; region 3 is central.
std::map<RegionId, GeoPoint> default_region_anchors();

Rect region_square(GeoPoint anchor, double side_km = 10.0);

}  // namespace drought::coverage
