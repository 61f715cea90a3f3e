#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drought/analytics/analytics.hpp"
#include "drought/coverage/planner.hpp"
#include "drought/env/environment.hpp"
#include "drought/net/network.hpp"
#include "drought/store/backbone.hpp"

namespace drought::scenario {

struct RegionConfig {
  RegionId id = 0;
  GeoPoint anchor;  // centroid of the region square
  double side_km = 10.0;
  env::Climatology climatology;
  env::DroughtScenario drought;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Seconds horizon_s = sim::kSecondsPerYear;
  Seconds reporting_period_s = 1800;
  Seconds active_window_s = 300;
  bool allow_short_period = false;

  coverage::CellShape cell_shape = coverage::CellShape::Hexagon;
  double radio_range_km = 2.074;
  std::size_t nodes_per_region = 0;  // 0: estimate_node_count + sink

  net::RoutingMode routing = net::RoutingMode::Tree;
  net::LinkParams link;
  net::MacParams mac;
  net::EnergyParams energy;
  net::DiffusionParams diffusion;
  net::StackParams stack;
  double initial_battery_mj = 2.0e7;

  env::WeatherParams weather;
  std::vector<RegionConfig> regions;

  store::BackboneParams backbone;
  GeoPoint remote_position{50.0, 50.0};
  store::Calibration calibration;

  analytics::Thresholds thresholds;
  unsigned window_days = 30;

  std::string output_dir = "out";
  bool trace = false;

  // Throws ValidationError (or the owning module's error) naming the first
  // broken invariant.
  void validate() const;

  net::NetworkConfig network_config() const;
  std::map<RegionId, GeoPoint> anchors() const;
  const RegionConfig& region(RegionId id) const;
};

// The five-region drought layout with every other knob at its default.
ScenarioConfig default_config();

// Parses YAML (JSON also works, so a run report's config echo loads back).
// Missing keys keep their defaults; unknown keys are rejected. Throws
// ParseError with the line and column, then validates.
ScenarioConfig parse_config(std::string_view text, std::string_view source_name = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

// Every field that affects a run's outputs, in a form parse_config accepts.
// output_dir is left out so a replay into another directory echoes the same.
nlohmann::json to_json(const ScenarioConfig& cfg);

}  // namespace drought::scenario
