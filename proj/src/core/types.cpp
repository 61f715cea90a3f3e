#include "drought/core/types.hpp"

#include <numbers>

namespace drought {

double bearing_deg(const GeoPoint& from, const GeoPoint& to) {
  const double deg =
      std::atan2(to.x_km - from.x_km, to.y_km - from.y_km) * 180.0 / std::numbers::pi;
  return deg < 0.0 ? deg + 360.0 : deg;
}

double angular_distance_deg(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

std::string_view field_name(Field f) {
  switch (f) {
    case Field::Temperature: return "temperature";
    case Field::Precipitation: return "precipitation";
    case Field::Humidity: return "humidity";
    case Field::Pressure: return "pressure";
    case Field::WindSpeed: return "wind_speed";
    case Field::WindDirection: return "wind_direction";
    case Field::Groundwater: return "groundwater";
  }
  return "?";
}

std::optional<Field> parse_field(std::string_view name) {
  for (Field f : kAllFields) {
    if (field_name(f) == name) return f;
  }
  return std::nullopt;
}

double Measurements::get(Field f) const {
  switch (f) {
    case Field::Temperature: return temperature_c;
    case Field::Precipitation: return precipitation_mm;
    case Field::Humidity: return humidity_pct;
    case Field::Pressure: return pressure_hpa;
    case Field::WindSpeed: return wind_speed_ms;
    case Field::WindDirection: return wind_dir_deg;
    case Field::Groundwater: return groundwater_m;
  }
  return 0.0;
}

void Measurements::set(Field f, double value) {
  switch (f) {
    case Field::Temperature: temperature_c = value; break;
    case Field::Precipitation: precipitation_mm = value; break;
    case Field::Humidity: humidity_pct = value; break;
    case Field::Pressure: pressure_hpa = value; break;
    case Field::WindSpeed: wind_speed_ms = value; break;
    case Field::WindDirection: wind_dir_deg = value; break;
    case Field::Groundwater: groundwater_m = value; break;
  }
}

}  // namespace drought
