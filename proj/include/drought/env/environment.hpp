#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "drought/core/types.hpp"
#include "drought/sim/rng.hpp"

namespace drought::env {

inline constexpr Seconds kMonthSeconds = sim::kSecondsPerYear / 12;  // 2,628,000

struct Climatology {
  double mean_temp_c = 26.0;
  double amplitude_c = 4.0;
  double phase_rad = -1.5707963267948966;  // coldest at t = 0
  std::array<double, 12> monthly_precip_mm = {60, 55, 60, 70, 85, 100, 110, 105, 90, 80, 70, 65};
  double humidity_pct = 65.0;
  double pressure_hpa = 1010.0;
  double wind_dir_deg = 90.0;  // bearing the air moves toward
  double wind_speed_ms = 3.0;
  double groundwater_m = 12.0;

  void validate() const;
  double annual_precip_mm() const;
};

struct Wind {
  double direction_deg = 0.0;  // bearing the air moves toward
  double speed_ms = 0.0;
};

struct DroughtScenario {
  double temperature_anomaly_c = 0.0;
  double precipitation_scale = 1.0;  // in [0, 1]
  SimTime active_start{0};
  SimTime active_end = SimTime::max();
  std::optional<Wind> advection_wind;

  bool active_at(SimTime t) const { return t >= active_start && t < active_end; }
  void validate() const;
};

struct WeatherParams {
  double ar_rho = 0.9;  // per reference step
  double ar_sigma_c = 0.5;
  Seconds reference_step_s = 1800;
  double max_step_c = 1.5;  // largest temperature change between consecutive samples
  double noise_cap_c = 4.0;  // |AR noise| never exceeds this
  double gradient_x_c_per_km = 0.02;
  double gradient_y_c_per_km = -0.01;
  Seconds anomaly_ramp_s = 7 * sim::kSecondsPerDay;
  double rain_events_per_month = 6.0;
  double precip_jitter = 0.05;  // per-node multiplicative spread, +-fraction
  double humidity_sd_pct = 2.0;
  double pressure_sd_hpa = 0.8;
  double wind_dir_sd_deg = 15.0;
  double wind_speed_sd_ms = 0.8;
  double groundwater_sd_m = 0.02;
  double groundwater_drawdown_m_per_year = 1.5;

  void validate() const;
};

struct RegionClimate {
  Rect area;
  Climatology climatology;
  DroughtScenario drought;
};

// Deterministic climatological temperature (no anomaly, no noise).
double seasonal_normal_c(const Climatology& clim, SimTime t);

// Scenario temperature offset at t, ramped in over `ramp` when the drought
// starts after t = 0 and ramped out after it ends.
double scenario_anomaly_c(const DroughtScenario& drought, SimTime t, Seconds ramp);

class TruthSampler;

// Ground-truth weather for every region. Rain is a regional field generated
// up front; per-node noise lives in TruthSampler.
class EnvironmentModel {
 public:
  EnvironmentModel(std::uint64_t seed, WeatherParams params,
                   std::map<RegionId, RegionClimate> regions, SimTime horizon);

  const RegionClimate& region(RegionId id) const;
  const WeatherParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const std::map<RegionId, RegionClimate>& regions() const { return regions_; }

  // Regional rainfall (before per-node jitter) accumulated over (from, to].
  double precipitation_between(RegionId id, SimTime from, SimTime to) const;

  // Regional rainfall the generator laid down in month m (0-based).
  double month_total(RegionId id, std::size_t month) const;

  // A node's sampling front end. `period` is the expected sampling interval,
  // used to size the first accumulation window.
  TruthSampler sampler(RegionId id, NodeId node, GeoPoint position, Seconds period) const;

 private:
  struct RainEvent {
    SimTime at;
    double depth_mm;
    std::size_t month;
  };

  std::uint64_t seed_;
  WeatherParams params_;
  std::map<RegionId, RegionClimate> regions_;
  std::map<RegionId, std::vector<RainEvent>> rain_;
};

// Stateful per-node sampler: the AR(1) temperature noise carries over from
// one sample to the next, so calls must come in non-decreasing time order.
class TruthSampler {
 public:
  SensorReading sample_truth(SimTime t);

  // Deterministic part of the temperature at this node (no AR noise).
  double deterministic_temperature_c(SimTime t) const;
  double spatial_offset_c() const;

 private:
  friend class EnvironmentModel;
  TruthSampler(const EnvironmentModel* model, RegionId region, NodeId node, GeoPoint position,
               Seconds period, sim::RngStream rng);

  const EnvironmentModel* model_;
  RegionId region_;
  NodeId node_;
  GeoPoint position_;
  Seconds period_;
  sim::RngStream rng_;
  double noise_c_ = 0.0;
  std::optional<SimTime> last_t_;
  double last_temp_c_ = 0.0;
};

// The five-region drought layout: region 3 serious (+3 C, no rain), region 4
// moderate (+1.5 C, rain scaled to 0.2 so every month stays under 25 mm),
// region 2 slight (+0.7 C, half rain), regions 1 and 5 normal. Regions 3 and 4
// carry a 6 m/s wind blowing from region 3's anchor toward region 4's.
std::map<RegionId, DroughtScenario> canonical_scenario(const std::map<RegionId, GeoPoint>& anchors);

// Per region per day: min/max/mean temperature and precipitation total, from
// a noise-bearing sampler at the region centroid sampled every `period`.
void write_truth_dump(const EnvironmentModel& model, SimTime horizon, Seconds period,
                      std::ostream& out);

}  // namespace drought::env
