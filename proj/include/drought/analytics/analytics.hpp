#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drought/core/types.hpp"
#include "drought/env/environment.hpp"
#include "drought/store/database.hpp"

namespace drought::analytics {

enum class SeverityClass : std::uint8_t { NonDrought = 0, Slight, Moderate, Serious };

std::string_view severity_name(SeverityClass c);
std::optional<SeverityClass> parse_severity(std::string_view name);
// One step up, saturating at Serious.
SeverityClass escalate(SeverityClass c);

struct Thresholds {
  double precip_serious_mm = 5.0;
  double anomaly_serious_c = 2.0;
  double precip_moderate_mm = 25.0;
  double anomaly_moderate_c = 1.0;
  double precip_slight_mm = 50.0;
  double anomaly_slight_c = 0.5;

  // InvalidThresholds unless the tiers are strictly ordered.
  void validate() const;
};

struct DroughtIndicators {
  RegionId region_id = 0;
  TimeWindow window;
  double mean_temp_anomaly_c = 0.0;
  double mean_monthly_precip_mm = 0.0;  // per 30-day month
  double wind_mean_dir_deg = 0.0;
  double wind_mean_speed_ms = 0.0;
  std::size_t records = 0;
};

inline constexpr Seconds kMinWindow = 30 * sim::kSecondsPerDay;
inline constexpr Seconds kIndicatorMonth = 30 * sim::kSecondsPerDay;

// Indicators from the calibrated records of `region` inside `window`. The
// temperature anomaly is measured against `climatology`'s seasonal normal at
// each record's timestamp. Rain is the per-timestamp regional mean summed over
// the window, scaled to a 30-day month.
DroughtIndicators compute_indicators(const store::CentralDatabase& db, RegionId region, TimeWindow window,
                                     const env::Climatology& climatology);

SeverityClass classify(const DroughtIndicators& ind, const Thresholds& thresholds = {});
// Same rule on bare numbers; what the indicator overload calls.
SeverityClass classify(double anomaly_c, double monthly_precip_mm, const Thresholds& thresholds = {});

struct PatternEntry {
  TimeWindow window;
  SeverityClass severity = SeverityClass::NonDrought;
  DroughtIndicators indicators;
};

struct EvolutionPattern {
  RegionId region_id = 0;
  std::vector<PatternEntry> entries;
};

// Splits the region's record span into consecutive windows of
// `window_len_days`; a short tail is folded into the last window. Throws
// InsufficientSpan when fewer than two whole windows fit.
EvolutionPattern evolve_pattern(const store::CentralDatabase& db, RegionId region, unsigned window_len_days,
                                const env::Climatology& climatology, const Thresholds& thresholds = {});

struct Forecast {
  SeverityClass current = SeverityClass::NonDrought;
  SeverityClass forecast = SeverityClass::NonDrought;
};

inline constexpr double kDownwindHalfAngleDeg = 45.0;

// Wind advection: every region at Moderate or worse with a non-zero mean wind
// pushes its nearest downwind neighbor (anchor bearing within the cone) up one
// class. Ties on distance go to the lower region id.
std::map<RegionId, Forecast> advect_forecast(const std::map<RegionId, SeverityClass>& current,
                                             const std::map<RegionId, DroughtIndicators>& indicators,
                                             const std::map<RegionId, GeoPoint>& anchors);

// Current class and indicators taken from each pattern's latest window.
std::map<RegionId, Forecast> advect_forecast(const std::map<RegionId, EvolutionPattern>& patterns,
                                             const std::map<RegionId, GeoPoint>& anchors);

std::optional<RegionId> downwind_neighbor(RegionId from, double wind_dir_deg,
                                          const std::map<RegionId, GeoPoint>& anchors);

// region,window_start,window_end,class,anomaly_C,precip_mm
void write_pattern_csv(const std::vector<EvolutionPattern>& patterns, std::ostream& out);
nlohmann::json forecast_json(const std::map<RegionId, Forecast>& forecasts);

}  // namespace drought::analytics
