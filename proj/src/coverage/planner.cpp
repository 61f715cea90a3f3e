#include "drought/coverage/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "drought/errors.hpp"

namespace drought::coverage {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void require_positive(double radio_range_km) {
  if (!(radio_range_km > 0.0) || !std::isfinite(radio_range_km)) {
    throw NonPositiveRange("radio range must be > 0 km, got " + std::to_string(radio_range_km));
  }
}

// Lattice basis plus the per-cell sub-offsets (triangles need two).
struct Lattice {
  GeoPoint b1;
  GeoPoint b2;
  std::vector<GeoPoint> sub;
};

Lattice lattice_for(CellShape shape, double r) {
  switch (shape) {
    case CellShape::Hexagon: {
      const double a = kSqrt3 * r;
      return {{a, 0.0}, {a / 2, 1.5 * r}, {{0.0, 0.0}}};
    }
    case CellShape::Square: {
      const double s = std::numbers::sqrt2 * r;
      return {{s, 0.0}, {0.0, s}, {{0.0, 0.0}}};
    }
    case CellShape::EquilateralTriangle: {
      // Up-triangle centroids sit on the lattice, down-triangle centroids are
      // shifted by (t/2, t*sqrt3/6) relative to them.
      const double t = kSqrt3 * r;
      return {{t, 0.0}, {t / 2, t * kSqrt3 / 2}, {{0.0, 0.0}, {t / 2, t * kSqrt3 / 6}}};
    }
    case CellShape::Circle: break;
  }
  throw UntileableShape("circles cannot tile the plane without gaps or overlap");
}

struct Ranked {
  double dist;
  GeoPoint p;
};

bool ranked_less(const Ranked& a, const Ranked& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  if (a.p.y_km != b.p.y_km) return a.p.y_km < b.p.y_km;
  return a.p.x_km < b.p.x_km;
}

}  // namespace

std::string_view shape_name(CellShape shape) {
  switch (shape) {
    case CellShape::Circle: return "circle";
    case CellShape::Square: return "square";
    case CellShape::EquilateralTriangle: return "triangle";
    case CellShape::Hexagon: return "hexagon";
  }
  return "?";
}

std::optional<CellShape> parse_shape(std::string_view name) {
  for (auto s : {CellShape::Circle, CellShape::Square, CellShape::EquilateralTriangle,
                 CellShape::Hexagon}) {
    if (shape_name(s) == name) return s;
  }
  return std::nullopt;
}

double footprint_area(CellShape shape, double radio_range_km) {
  require_positive(radio_range_km);
  const double r2 = radio_range_km * radio_range_km;
  switch (shape) {
    case CellShape::Circle: return std::numbers::pi * r2;
    case CellShape::Square: return 2.0 * r2;  // side r*sqrt2
    case CellShape::EquilateralTriangle: return 3.0 * kSqrt3 / 4.0 * r2;  // side r*sqrt3
    case CellShape::Hexagon: return 3.0 * kSqrt3 / 2.0 * r2;
  }
  return 0.0;
}

std::size_t estimate_node_count(double region_area_km2, CellShape shape, double radio_range_km) {
  if (!(region_area_km2 > 0.0)) throw ValidationError("region area must be > 0 km^2");
  const double cells = region_area_km2 / footprint_area(shape, radio_range_km);
  return static_cast<std::size_t>(std::ceil(cells));
}

double lattice_spacing(CellShape shape, double radio_range_km) {
  require_positive(radio_range_km);
  switch (shape) {
    case CellShape::Hexagon: return kSqrt3 * radio_range_km;
    case CellShape::Square: return std::numbers::sqrt2 * radio_range_km;
    case CellShape::EquilateralTriangle: return radio_range_km;
    case CellShape::Circle: break;
  }
  throw UntileableShape("circles cannot tile the plane without gaps or overlap");
}

std::vector<GeoPoint> lattice_centers(CellShape shape, double radio_range_km, GeoPoint origin,
                                      const Rect& bounds) {
  require_positive(radio_range_km);
  const Lattice lat = lattice_for(shape, radio_range_km);
  const double margin = radio_range_km;
  const Rect grown{{bounds.min.x_km - margin, bounds.min.y_km - margin},
                   {bounds.max.x_km + margin, bounds.max.y_km + margin}};

  // Lattice coordinates of the grown box corners bound the (i, j) search.
  const double det = lat.b1.x_km * lat.b2.y_km - lat.b1.y_km * lat.b2.x_km;
  double imin = 1e300, imax = -1e300, jmin = 1e300, jmax = -1e300;
  for (double x : {grown.min.x_km, grown.max.x_km}) {
    for (double y : {grown.min.y_km, grown.max.y_km}) {
      const double dx = x - origin.x_km;
      const double dy = y - origin.y_km;
      const double i = (dx * lat.b2.y_km - dy * lat.b2.x_km) / det;
      const double j = (lat.b1.x_km * dy - lat.b1.y_km * dx) / det;
      imin = std::min(imin, i);
      imax = std::max(imax, i);
      jmin = std::min(jmin, j);
      jmax = std::max(jmax, j);
    }
  }

  std::vector<GeoPoint> out;
  for (auto j = static_cast<long>(std::floor(jmin)) - 1; j <= static_cast<long>(std::ceil(jmax)) + 1;
       ++j) {
    for (auto i = static_cast<long>(std::floor(imin)) - 1;
         i <= static_cast<long>(std::ceil(imax)) + 1; ++i) {
      for (const GeoPoint& s : lat.sub) {
        const GeoPoint p{origin.x_km + i * lat.b1.x_km + j * lat.b2.x_km + s.x_km,
                         origin.y_km + i * lat.b1.y_km + j * lat.b2.y_km + s.y_km};
        if (grown.contains(p, 0.0)) out.push_back(p);
      }
    }
  }
  return out;
}

PlacementPlan tile_region(RegionId region_id, const Rect& area, CellShape shape,
                          double radio_range_km, std::size_t node_count) {
  require_positive(radio_range_km);
  if (shape == CellShape::Circle) {
    throw UntileableShape("circles cannot tile the plane without gaps or overlap");
  }
  if (node_count < 1) throw InsufficientNodes("a placement needs at least the sink node");

  const Lattice lat = lattice_for(shape, radio_range_km);
  const GeoPoint centroid = area.centroid();
  constexpr int kSteps = 32;

  std::vector<Ranked> best;
  double best_sink_dist = 0.0;
  for (int v = 0; v < kSteps; ++v) {
    for (int u = 0; u < kSteps; ++u) {
      const double fu = static_cast<double>(u) / kSteps;
      const double fv = static_cast<double>(v) / kSteps;
      const GeoPoint origin{centroid.x_km + fu * lat.b1.x_km + fv * lat.b2.x_km,
                            centroid.y_km + fu * lat.b1.y_km + fv * lat.b2.y_km};
      std::vector<Ranked> inside;
      for (const GeoPoint& p : lattice_centers(shape, radio_range_km, origin, area)) {
        if (area.contains(p)) inside.push_back({distance_km(p, centroid), p});
      }
      if (inside.size() < node_count) continue;
      std::sort(inside.begin(), inside.end(), ranked_less);
      if (best.empty() || inside.front().dist < best_sink_dist - 1e-12) {
        best_sink_dist = inside.front().dist;
        inside.resize(node_count);
        best = std::move(inside);
      }
    }
  }
  if (best.empty()) {
    throw PlacementInfeasible("region " + std::to_string(region_id) + " cannot hold " +
                              std::to_string(node_count) + " " + std::string(shape_name(shape)) +
                              " cells of range " + std::to_string(radio_range_km) + " km");
  }

  PlacementPlan plan;
  plan.region_id = region_id;
  plan.cell_shape = shape;
  plan.radio_range_km = radio_range_km;
  plan.area = area;
  plan.node_positions.reserve(best.size());
  for (const Ranked& r : best) plan.node_positions.push_back(r.p);
  plan.sink_position = plan.node_positions.front();
  return plan;
}

std::vector<std::vector<std::size_t>> neighbor_lists(const std::vector<GeoPoint>& positions,
                                                     double link_range_km) {
  std::vector<std::vector<std::size_t>> adj(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (distance_km(positions[i], positions[j]) <= link_range_km + 1e-9) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  return adj;
}

ConnectivityReport connectivity_check(const PlacementPlan& plan) {
  ConnectivityReport report;
  const auto& pos = plan.node_positions;
  if (pos.empty()) return report;
  const auto adj = neighbor_lists(pos, plan.link_range_km());

  std::vector<int> component(pos.size(), -1);
  int count = 0;
  for (std::size_t start = 0; start < pos.size(); ++start) {
    if (component[start] >= 0) continue;
    std::queue<std::size_t> q;
    q.push(start);
    component[start] = count;
    while (!q.empty()) {
      const std::size_t n = q.front();
      q.pop();
      for (std::size_t m : adj[n]) {
        if (component[m] < 0) {
          component[m] = count;
          q.push(m);
        }
      }
    }
    ++count;
  }
  report.components = static_cast<std::size_t>(count);
  report.connected = count == 1;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (component[i] != component[0]) report.unreachable.push_back(i);
  }
  report.all_reach_sink = report.unreachable.empty();
  return report;
}

nlohmann::json to_json(const PlacementPlan& plan) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.node_positions.size(); ++i) {
    nodes.push_back({{"node_index", i},
                     {"x_km", plan.node_positions[i].x_km},
                     {"y_km", plan.node_positions[i].y_km},
                     {"is_sink", i == 0}});
  }
  return {{"region_id", plan.region_id},
          {"shape", shape_name(plan.cell_shape)},
          {"range_km", plan.radio_range_km},
          {"nodes", std::move(nodes)}};
}

std::map<RegionId, GeoPoint> default_region_anchors() {
  return {{1, {5.0, 95.0}}, {2, {95.0, 95.0}}, {3, {50.0, 50.0}}, {4, {95.0, 5.0}}, {5, {5.0, 5.0}}};
}

Rect region_square(GeoPoint anchor, double side_km) {
  const double h = side_km / 2;
  return {{anchor.x_km - h, anchor.y_km - h}, {anchor.x_km + h, anchor.y_km + h}};
}

}  // namespace drought::coverage
