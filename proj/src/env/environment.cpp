#include "drought/env/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "drought/errors.hpp"

namespace drought::env {

namespace {

double wrap_deg(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  return d >= 360.0 ? 0.0 : d;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

void Climatology::validate() const {
  require(amplitude_c >= 0.0, "climatology amplitude_c must be >= 0");
  for (double p : monthly_precip_mm) {
    require(p >= 0.0 && std::isfinite(p), "climatology monthly_precip_mm must be >= 0");
  }
  require(humidity_pct >= 0.0 && humidity_pct <= 100.0, "climatology humidity_pct must be in [0,100]");
  require(wind_speed_ms >= 0.0, "climatology wind_speed_ms must be >= 0");
}

double Climatology::annual_precip_mm() const {
  return std::accumulate(monthly_precip_mm.begin(), monthly_precip_mm.end(), 0.0);
}

void DroughtScenario::validate() const {
  require(precipitation_scale >= 0.0 && precipitation_scale <= 1.0,
          "drought precipitation_scale must be in [0,1]");
  require(active_start <= active_end, "drought active_window start must not exceed end");
  if (advection_wind) require(advection_wind->speed_ms >= 0.0, "advection wind speed must be >= 0");
}

void WeatherParams::validate() const {
  require(ar_rho >= 0.0 && ar_rho < 1.0, "weather ar_rho must be in [0,1)");
  require(ar_sigma_c >= 0.0, "weather ar_sigma_c must be >= 0");
  require(reference_step_s > 0, "weather reference_step_s must be > 0");
  require(max_step_c > 0.0, "weather max_step_c must be > 0");
  require(noise_cap_c >= 0.0, "weather noise_cap_c must be >= 0");
  require(rain_events_per_month > 0.0, "weather rain_events_per_month must be > 0");
  require(precip_jitter >= 0.0 && precip_jitter < 1.0, "weather precip_jitter must be in [0,1)");
}

double seasonal_normal_c(const Climatology& clim, SimTime t) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(t.seconds()) /
                       static_cast<double>(sim::kSecondsPerYear);
  return clim.mean_temp_c + clim.amplitude_c * std::sin(phase + clim.phase_rad);
}

double scenario_anomaly_c(const DroughtScenario& drought, SimTime t, Seconds ramp) {
  if (drought.temperature_anomaly_c == 0.0 || t < drought.active_start) return 0.0;
  double factor = 1.0;
  if (ramp > 0 && drought.active_start > SimTime(0)) {
    factor = std::min(1.0, static_cast<double>(t - drought.active_start) / static_cast<double>(ramp));
  }
  if (t >= drought.active_end) {
    if (ramp == 0) return 0.0;
    const double since_end = static_cast<double>(t - drought.active_end);
    factor = std::min(factor, std::max(0.0, 1.0 - since_end / static_cast<double>(ramp)));
  }
  return drought.temperature_anomaly_c * factor;
}

EnvironmentModel::EnvironmentModel(std::uint64_t seed, WeatherParams params,
                                   std::map<RegionId, RegionClimate> regions, SimTime horizon)
    : seed_(seed), params_(params), regions_(std::move(regions)) {
  params_.validate();
  const std::size_t months = static_cast<std::size_t>(horizon.seconds() / kMonthSeconds) + 2;
  for (const auto& [id, rc] : regions_) {
    rc.climatology.validate();
    rc.drought.validate();
    auto& events = rain_[id];
    for (std::size_t m = 0; m < months; ++m) {
      sim::RngStream rng(seed_, fmt::format("rain:region:{}:month:{}", id, m));
      const std::uint64_t start = m * kMonthSeconds;
      const double mean_gap = static_cast<double>(kMonthSeconds) / params_.rain_events_per_month;
      std::vector<RainEvent> month;
      double offset = rng.exponential(mean_gap);
      while (offset < static_cast<double>(kMonthSeconds)) {
        month.push_back({SimTime(start + 1 + static_cast<std::uint64_t>(offset)), rng.exponential(1.0), m});
        offset += rng.exponential(mean_gap);
      }
      if (month.empty()) month.push_back({SimTime(start + kMonthSeconds / 2), 1.0, m});
      const double raw = std::accumulate(month.begin(), month.end(), 0.0,
                                         [](double s, const RainEvent& e) { return s + e.depth_mm; });
      const double normal = rc.climatology.monthly_precip_mm[m % 12];
      for (auto& e : month) {
        e.depth_mm *= normal / raw;
        if (rc.drought.active_at(e.at)) e.depth_mm *= rc.drought.precipitation_scale;
        events.push_back(e);
      }
    }
  }
}

const RegionClimate& EnvironmentModel::region(RegionId id) const {
  const auto it = regions_.find(id);
  if (it == regions_.end()) throw UnknownRegion("no climatology for region " + std::to_string(id));
  return it->second;
}

double EnvironmentModel::precipitation_between(RegionId id, SimTime from, SimTime to) const {
  const auto it = rain_.find(id);
  if (it == rain_.end()) throw UnknownRegion("no climatology for region " + std::to_string(id));
  const auto& ev = it->second;
  auto lo = std::upper_bound(ev.begin(), ev.end(), from,
                             [](SimTime t, const RainEvent& e) { return t < e.at; });
  double total = 0.0;
  for (; lo != ev.end() && lo->at <= to; ++lo) total += lo->depth_mm;
  return total;
}

double EnvironmentModel::month_total(RegionId id, std::size_t month) const {
  const auto it = rain_.find(id);
  if (it == rain_.end()) throw UnknownRegion("no climatology for region " + std::to_string(id));
  double total = 0.0;
  for (const auto& e : it->second) {
    if (e.month == month) total += e.depth_mm;
  }
  return total;
}

TruthSampler EnvironmentModel::sampler(RegionId id, NodeId node, GeoPoint position,
                                       Seconds period) const {
  region(id);  // validates the id
  return TruthSampler(this, id, node, position, period,
                      sim::RngStream(seed_, fmt::format("env:node:{}:region:{}", node, id)));
}

TruthSampler::TruthSampler(const EnvironmentModel* model, RegionId region, NodeId node,
                           GeoPoint position, Seconds period, sim::RngStream rng)
    : model_(model), region_(region), node_(node), position_(position), period_(period),
      rng_(std::move(rng)) {}

double TruthSampler::spatial_offset_c() const {
  const auto& p = model_->params();
  const GeoPoint c = model_->region(region_).area.centroid();
  return p.gradient_x_c_per_km * (position_.x_km - c.x_km) +
         p.gradient_y_c_per_km * (position_.y_km - c.y_km);
}

double TruthSampler::deterministic_temperature_c(SimTime t) const {
  const auto& rc = model_->region(region_);
  return seasonal_normal_c(rc.climatology, t) +
         scenario_anomaly_c(rc.drought, t, model_->params().anomaly_ramp_s) + spatial_offset_c();
}

SensorReading TruthSampler::sample_truth(SimTime t) {
  const auto& p = model_->params();
  const auto& rc = model_->region(region_);
  const double anomaly = scenario_anomaly_c(rc.drought, t, p.anomaly_ramp_s);

  // AR(1) noise with a variance-preserving step for irregular gaps.
  const double stationary_sd = p.ar_sigma_c / std::sqrt(1.0 - p.ar_rho * p.ar_rho);
  const Seconds gap = last_t_ ? t - *last_t_ : period_;
  const double steps = static_cast<double>(gap) / static_cast<double>(p.reference_step_s);
  const double step_cap = 0.8 * p.max_step_c * std::max(1.0, steps);
  if (!last_t_) {
    noise_c_ = std::clamp(rng_.normal(0.0, stationary_sd), -p.noise_cap_c, p.noise_cap_c);
  } else {
    const double rho = std::pow(p.ar_rho, steps);
    const double sd = stationary_sd * std::sqrt(1.0 - rho * rho);
    const double proposed = rho * noise_c_ + rng_.normal(0.0, sd);
    noise_c_ = std::clamp(std::clamp(proposed, noise_c_ - step_cap, noise_c_ + step_cap),
                          -p.noise_cap_c, p.noise_cap_c);
  }
  double temp = deterministic_temperature_c(t) + noise_c_;
  if (last_t_) {
    const double cap = p.max_step_c * std::max(1.0, steps);
    temp = std::clamp(temp, last_temp_c_ - cap, last_temp_c_ + cap);
  }

  const SimTime from = last_t_ ? *last_t_ : SimTime(t.seconds() > period_ ? t.seconds() - period_ : 0);
  const double jitter = 1.0 + p.precip_jitter * (2.0 * rng_.uniform01() - 1.0);
  const double precip = model_->precipitation_between(region_, from, t) * jitter;

  const Climatology& clim = rc.climatology;
  const bool advecting = rc.drought.advection_wind && rc.drought.active_at(t);
  const Wind base = advecting ? *rc.drought.advection_wind : Wind{clim.wind_dir_deg, clim.wind_speed_ms};

  double drawdown = 0.0;
  if (rc.drought.precipitation_scale < 1.0 && t >= rc.drought.active_start) {
    const SimTime until = std::min(t, rc.drought.active_end);
    drawdown = p.groundwater_drawdown_m_per_year * (1.0 - rc.drought.precipitation_scale) *
               static_cast<double>(until - rc.drought.active_start) /
               static_cast<double>(sim::kSecondsPerYear);
  }

  SensorReading r;
  r.node_id = node_;
  r.region_id = region_;
  r.timestamp = t;
  r.values.temperature_c = temp;
  r.values.precipitation_mm = precip;
  r.values.humidity_pct =
      std::clamp(clim.humidity_pct - 4.0 * anomaly + rng_.normal(0.0, p.humidity_sd_pct), 0.0, 100.0);
  r.values.pressure_hpa = clim.pressure_hpa + 0.8 * anomaly + rng_.normal(0.0, p.pressure_sd_hpa);
  r.values.wind_speed_ms = std::max(0.0, base.speed_ms + rng_.normal(0.0, p.wind_speed_sd_ms));
  r.values.wind_dir_deg = wrap_deg(base.direction_deg + rng_.normal(0.0, p.wind_dir_sd_deg));
  r.values.groundwater_m = clim.groundwater_m + drawdown + rng_.normal(0.0, p.groundwater_sd_m);

  last_t_ = t;
  last_temp_c_ = temp;
  return r;
}

std::map<RegionId, DroughtScenario> canonical_scenario(const std::map<RegionId, GeoPoint>& anchors) {
  std::map<RegionId, DroughtScenario> out;
  for (const auto& [id, anchor] : anchors) out[id] = DroughtScenario{};
  if (anchors.count(3) == 0 || anchors.count(4) == 0) return out;
  const Wind dry_wind{bearing_deg(anchors.at(3), anchors.at(4)), 6.0};
  out[3] = DroughtScenario{3.0, 0.0, SimTime(0), SimTime::max(), dry_wind};
  out[4] = DroughtScenario{1.5, 0.2, SimTime(0), SimTime::max(), dry_wind};
  if (anchors.count(2) != 0) out[2] = DroughtScenario{0.7, 0.5, SimTime(0), SimTime::max(), std::nullopt};
  return out;
}

void write_truth_dump(const EnvironmentModel& model, SimTime horizon, Seconds period,
                      std::ostream& out) {
  out << "region_id,day,temp_min_c,temp_max_c,temp_mean_c,precip_total_mm\n";
  for (const auto& [id, rc] : model.regions()) {
    TruthSampler s = model.sampler(id, kNoNode, rc.area.centroid(), period);
    const std::uint64_t days = (horizon.seconds() + sim::kSecondsPerDay - 1) / sim::kSecondsPerDay;
    for (std::uint64_t day = 0; day < days; ++day) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      double sum = 0.0;
      double rain = 0.0;
      int n = 0;
      for (std::uint64_t t = day * sim::kSecondsPerDay;
           t < (day + 1) * sim::kSecondsPerDay && t < horizon.seconds(); t += period) {
        const auto r = s.sample_truth(SimTime(t));
        lo = std::min(lo, r.values.temperature_c);
        hi = std::max(hi, r.values.temperature_c);
        sum += r.values.temperature_c;
        rain += r.values.precipitation_mm;
        ++n;
      }
      if (n == 0) continue;
      out << fmt::format("{},{},{},{},{},{}\n", id, day, lo, hi, sum / n, rain);
    }
  }
}

}  // namespace drought::env
