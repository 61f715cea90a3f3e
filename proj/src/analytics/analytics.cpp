#include "drought/analytics/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "drought/errors.hpp"

namespace drought::analytics {

namespace {

constexpr std::array<std::string_view, 4> kSeverityNames = {"NonDrought", "Slight", "Moderate", "Serious"};

}  // namespace

std::string_view severity_name(SeverityClass c) { return kSeverityNames.at(static_cast<std::size_t>(c)); }

std::optional<SeverityClass> parse_severity(std::string_view name) {
  for (std::size_t i = 0; i < kSeverityNames.size(); ++i) {
    if (kSeverityNames[i] == name) return static_cast<SeverityClass>(i);
  }
  return std::nullopt;
}

SeverityClass escalate(SeverityClass c) {
  return c == SeverityClass::Serious ? c : static_cast<SeverityClass>(static_cast<std::uint8_t>(c) + 1);
}

void Thresholds::validate() const {
  const bool finite = std::isfinite(precip_serious_mm) && std::isfinite(precip_moderate_mm) &&
                      std::isfinite(precip_slight_mm) && std::isfinite(anomaly_serious_c) &&
                      std::isfinite(anomaly_moderate_c) && std::isfinite(anomaly_slight_c);
  if (!finite) throw InvalidThresholds("thresholds must be finite");
  if (!(precip_serious_mm < precip_moderate_mm && precip_moderate_mm < precip_slight_mm)) {
    throw InvalidThresholds(fmt::format("precipitation tiers must satisfy serious < moderate < slight, got {} / {} / {}",
                                        precip_serious_mm, precip_moderate_mm, precip_slight_mm));
  }
  if (!(anomaly_serious_c > anomaly_moderate_c && anomaly_moderate_c > anomaly_slight_c)) {
    throw InvalidThresholds(fmt::format("anomaly tiers must satisfy serious > moderate > slight, got {} / {} / {}",
                                        anomaly_serious_c, anomaly_moderate_c, anomaly_slight_c));
  }
}

SeverityClass classify(double anomaly_c, double precip_mm, const Thresholds& t) {
  t.validate();
  if (precip_mm < t.precip_serious_mm && anomaly_c > t.anomaly_serious_c) return SeverityClass::Serious;
  if (precip_mm < t.precip_moderate_mm && anomaly_c > t.anomaly_moderate_c) return SeverityClass::Moderate;
  if (precip_mm < t.precip_slight_mm || anomaly_c > t.anomaly_slight_c) return SeverityClass::Slight;
  return SeverityClass::NonDrought;
}

SeverityClass classify(const DroughtIndicators& ind, const Thresholds& thresholds) {
  return classify(ind.mean_temp_anomaly_c, ind.mean_monthly_precip_mm, thresholds);
}

DroughtIndicators compute_indicators(const store::CentralDatabase& db, RegionId region, TimeWindow window,
                                     const env::Climatology& climatology) {
  if (window.end <= window.start || window.length() < kMinWindow) {
    throw InvalidWindow(fmt::format("indicator window [{}, {}) is shorter than 30 days", window.start.seconds(),
                                    window.end.seconds()));
  }
  DroughtIndicators ind;
  ind.region_id = region;
  ind.window = window;

  double anomaly_sum = 0.0;
  double speed_sum = 0.0;
  double precip_total = 0.0;
  std::vector<double> directions;

  // Records arrive ordered by (timestamp, node); rain is averaged across the
  // nodes reporting at each timestamp before summing over time.
  std::optional<SimTime> current_ts;
  double ts_precip = 0.0;
  std::size_t ts_nodes = 0;
  const auto flush = [&] {
    if (ts_nodes > 0) precip_total += ts_precip / static_cast<double>(ts_nodes);
    ts_precip = 0.0;
    ts_nodes = 0;
  };

  for (const store::StoredRecord* r : db.region_records(region)) {
    if (!window.contains(r->timestamp)) continue;
    if (current_ts != r->timestamp) {
      flush();
      current_ts = r->timestamp;
    }
    const auto& v = r->calibrated.values;
    anomaly_sum += v.temperature_c - env::seasonal_normal_c(climatology, r->timestamp);
    speed_sum += v.wind_speed_ms;
    directions.push_back(v.wind_dir_deg);
    ts_precip += v.precipitation_mm;
    ++ts_nodes;
    ++ind.records;
  }
  flush();
  if (ind.records == 0) {
    throw NoData(fmt::format("region {} has no records in [{}, {})", region, window.start.seconds(),
                             window.end.seconds()));
  }
  const double n = static_cast<double>(ind.records);
  ind.mean_temp_anomaly_c = anomaly_sum / n;
  ind.mean_monthly_precip_mm =
      precip_total * static_cast<double>(kIndicatorMonth) / static_cast<double>(window.length());
  ind.wind_mean_dir_deg = store::circular_mean_deg(directions);
  ind.wind_mean_speed_ms = speed_sum / n;
  return ind;
}

EvolutionPattern evolve_pattern(const store::CentralDatabase& db, RegionId region, unsigned window_len_days,
                                const env::Climatology& climatology, const Thresholds& thresholds) {
  thresholds.validate();
  const Seconds len = static_cast<Seconds>(window_len_days) * sim::kSecondsPerDay;
  if (len < kMinWindow) throw InvalidWindow(fmt::format("pattern windows of {} days are under 30", window_len_days));
  const auto span = db.span(region);
  if (!span) throw NoData(fmt::format("region {} has no records", region));
  const std::uint64_t whole = span->length() / len;
  if (whole < 2) {
    throw InsufficientSpan(fmt::format("region {} spans {} s, need at least two {}-day windows", region,
                                       span->length(), window_len_days));
  }
  EvolutionPattern pattern;
  pattern.region_id = region;
  for (std::uint64_t i = 0; i < whole; ++i) {
    TimeWindow w{span->start + i * len, i + 1 == whole ? span->end : span->start + (i + 1) * len};
    auto ind = compute_indicators(db, region, w, climatology);
    pattern.entries.push_back({w, classify(ind, thresholds), ind});
  }
  return pattern;
}

std::optional<RegionId> downwind_neighbor(RegionId from, double wind_dir_deg,
                                          const std::map<RegionId, GeoPoint>& anchors) {
  const auto origin = anchors.find(from);
  if (origin == anchors.end()) throw UnknownRegion(fmt::format("no anchor for region {}", from));
  std::optional<RegionId> best;
  double best_d = 0.0;
  for (const auto& [id, anchor] : anchors) {
    if (id == from) continue;
    if (angular_distance_deg(bearing_deg(origin->second, anchor), wind_dir_deg) > kDownwindHalfAngleDeg) continue;
    const double d = distance_km(origin->second, anchor);
    // Map order is ascending id, so strict < keeps the lower id on ties.
    if (!best || d < best_d) {
      best = id;
      best_d = d;
    }
  }
  return best;
}

std::map<RegionId, Forecast> advect_forecast(const std::map<RegionId, SeverityClass>& current,
                                             const std::map<RegionId, DroughtIndicators>& indicators,
                                             const std::map<RegionId, GeoPoint>& anchors) {
  std::map<RegionId, Forecast> out;
  for (const auto& [id, c] : current) out[id] = {c, c};
  for (const auto& [id, c] : current) {
    if (c < SeverityClass::Moderate) continue;
    const auto ind = indicators.find(id);
    if (ind == indicators.end() || !(ind->second.wind_mean_speed_ms > 0.0)) continue;
    const auto target = downwind_neighbor(id, ind->second.wind_mean_dir_deg, anchors);
    if (!target) continue;
    auto it = out.find(*target);
    if (it == out.end()) continue;
    it->second.forecast = std::max(it->second.forecast, escalate(it->second.current));
  }
  return out;
}

std::map<RegionId, Forecast> advect_forecast(const std::map<RegionId, EvolutionPattern>& patterns,
                                             const std::map<RegionId, GeoPoint>& anchors) {
  std::map<RegionId, SeverityClass> current;
  std::map<RegionId, DroughtIndicators> indicators;
  for (const auto& [id, p] : patterns) {
    if (p.entries.empty()) throw NoData(fmt::format("region {} has an empty pattern", id));
    current[id] = p.entries.back().severity;
    indicators[id] = p.entries.back().indicators;
  }
  return advect_forecast(current, indicators, anchors);
}

void write_pattern_csv(const std::vector<EvolutionPattern>& patterns, std::ostream& out) {
  out << "region,window_start,window_end,class,anomaly_C,precip_mm\n";
  for (const auto& p : patterns) {
    for (const auto& e : p.entries) {
      out << fmt::format("{},{},{},{},{},{}\n", p.region_id, e.window.start.seconds(), e.window.end.seconds(),
                         severity_name(e.severity), e.indicators.mean_temp_anomaly_c,
                         e.indicators.mean_monthly_precip_mm);
    }
  }
}

nlohmann::json forecast_json(const std::map<RegionId, Forecast>& forecasts) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, f] : forecasts) {
    j[std::to_string(id)] = {{"current", severity_name(f.current)}, {"forecast", severity_name(f.forecast)}};
  }
  return j;
}

}  // namespace drought::analytics
