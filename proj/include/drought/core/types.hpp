#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "drought/sim/time.hpp"

namespace drought {

using sim::Seconds;
using sim::SimTime;

// Global sensor-node index (all regions share one index space).
using NodeId = std::uint32_t;
// Sub-network number, 1-based.
using RegionId = std::uint32_t;

inline constexpr NodeId kNoNode = 0xFFFF'FFFFu;

struct GeoPoint {
  double x_km = 0.0;
  double y_km = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline double distance_km(const GeoPoint& a, const GeoPoint& b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

// Compass bearing in degrees [0, 360) from `from` toward `to`; 0 = +y (north),
// 90 = +x (east).
double bearing_deg(const GeoPoint& from, const GeoPoint& to);

// Smallest absolute angle between two bearings, in [0, 180].
double angular_distance_deg(double a, double b);

// Axis-aligned planar rectangle.
struct Rect {
  GeoPoint min;
  GeoPoint max;

  double width() const { return max.x_km - min.x_km; }
  double height() const { return max.y_km - min.y_km; }
  double area() const { return width() * height(); }
  GeoPoint centroid() const { return {(min.x_km + max.x_km) / 2, (min.y_km + max.y_km) / 2}; }
  bool contains(const GeoPoint& p, double eps = 1e-9) const {
    return p.x_km >= min.x_km - eps && p.x_km <= max.x_km + eps && p.y_km >= min.y_km - eps &&
           p.y_km <= max.y_km + eps;
  }
  bool overlaps(const Rect& o) const {
    return min.x_km < o.max.x_km && o.min.x_km < max.x_km && min.y_km < o.max.y_km &&
           o.min.y_km < max.y_km;
  }
};

// Half-open interval [start, end) of simulated time.
struct TimeWindow {
  SimTime start;
  SimTime end;

  Seconds length() const { return end - start; }
  bool contains(SimTime t) const { return t >= start && t < end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

enum class Field : std::uint8_t {
  Temperature = 0,
  Precipitation,
  Humidity,
  Pressure,
  WindSpeed,
  WindDirection,
  Groundwater,
};

inline constexpr std::size_t kFieldCount = 7;
inline constexpr std::array<Field, kFieldCount> kAllFields = {
    Field::Temperature, Field::Precipitation, Field::Humidity,   Field::Pressure,
    Field::WindSpeed,   Field::WindDirection, Field::Groundwater,
};

std::string_view field_name(Field f);
std::optional<Field> parse_field(std::string_view name);

// The seven sensed quantities of one sample.
struct Measurements {
  double temperature_c = 0.0;
  double precipitation_mm = 0.0;  // accumulated since the previous sample
  double humidity_pct = 0.0;
  double pressure_hpa = 0.0;
  double wind_speed_ms = 0.0;
  double wind_dir_deg = 0.0;  // bearing the air moves toward
  double groundwater_m = 0.0;  // depth to the water table

  double get(Field f) const;
  void set(Field f, double value);

  friend bool operator==(const Measurements&, const Measurements&) = default;
};

struct SensorReading {
  NodeId node_id = 0;
  RegionId region_id = 0;
  SimTime timestamp;
  Measurements values;

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

}  // namespace drought
