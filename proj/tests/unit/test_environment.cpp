#include <cmath>
#include <sstream>

#include "doctest.h"
#include "drought/coverage/planner.hpp"
#include "drought/env/environment.hpp"
#include "drought/errors.hpp"

using namespace drought;
using namespace drought::env;

namespace {

constexpr Seconds kPeriod = 1800;
const SimTime kYear(sim::kSecondsPerYear);

std::map<RegionId, RegionClimate> five_regions() {
  const auto anchors = coverage::default_region_anchors();
  const auto scenario = canonical_scenario(anchors);
  std::map<RegionId, RegionClimate> out;
  for (const auto& [id, anchor] : anchors) {
    out[id] = RegionClimate{coverage::region_square(anchor), Climatology{}, scenario.at(id)};
  }
  return out;
}

}  // namespace

TEST_CASE("canonical scenario labels") {
  const auto anchors = coverage::default_region_anchors();
  const auto s = canonical_scenario(anchors);
  CHECK(s.at(1).temperature_anomaly_c == 0.0);
  CHECK(s.at(5).temperature_anomaly_c == 0.0);
  CHECK(s.at(1).precipitation_scale == 1.0);
  CHECK(s.at(3).precipitation_scale == 0.0);
  CHECK(s.at(3).temperature_anomaly_c == 3.0);
  CHECK(s.at(4).temperature_anomaly_c == 1.5);
  CHECK(s.at(2).precipitation_scale == 0.5);

  // Region 4 sits to the south-east of region 3.
  REQUIRE(s.at(3).advection_wind.has_value());
  CHECK(s.at(3).advection_wind->direction_deg == doctest::Approx(135.0));
  CHECK(s.at(3).advection_wind->speed_ms > 0.0);
  const double rad = s.at(3).advection_wind->direction_deg * M_PI / 180.0;
  const GeoPoint from = anchors.at(3), to = anchors.at(4);
  const double dx = to.x_km - from.x_km, dy = to.y_km - from.y_km;
  const double cosang = (std::sin(rad) * dx + std::cos(rad) * dy) / std::hypot(dx, dy);
  CHECK(cosang == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero precipitation scale yields exactly zero rain") {
  const EnvironmentModel model(7, WeatherParams{}, five_regions(), kYear);
  for (std::size_t m = 0; m < 12; ++m) CHECK(model.month_total(3, m) == 0.0);
  auto s = model.sampler(3, 21, {50.0, 50.0}, kPeriod);
  double total = 0.0;
  for (Seconds t = 0; t < kYear.seconds(); t += kPeriod) {
    total += s.sample_truth(SimTime(t)).values.precipitation_mm;
  }
  CHECK(total == 0.0);
}

TEST_CASE("region 4 stays under 25 mm in every month, node jitter included") {
  const EnvironmentModel model(7, WeatherParams{}, five_regions(), kYear);
  for (std::size_t m = 0; m < 12; ++m) {
    CHECK(model.month_total(4, m) < 25.0 / (1.0 + WeatherParams{}.precip_jitter));
  }
}

TEST_CASE("zero-noise temperature is periodic in the year") {
  WeatherParams p;
  p.ar_sigma_c = 0.0;
  auto regions = five_regions();
  regions[1].drought = DroughtScenario{};
  const EnvironmentModel model(1, p, regions, SimTime(2 * sim::kSecondsPerYear));
  auto a = model.sampler(1, 3, {4.0, 96.0}, kPeriod);
  auto b = model.sampler(1, 3, {4.0, 96.0}, kPeriod);
  for (Seconds t = 0; t < sim::kSecondsPerYear; t += 97 * kPeriod) {
    CHECK(a.deterministic_temperature_c(SimTime(t)) ==
          doctest::Approx(b.deterministic_temperature_c(SimTime(t + sim::kSecondsPerYear))).epsilon(1e-12));
  }
  const double t0 = a.sample_truth(SimTime(0)).values.temperature_c;
  const double t1 = b.sample_truth(kYear).values.temperature_c;
  CHECK(t0 == doctest::Approx(t1).epsilon(1e-12));
}

TEST_CASE("two nodes in one region differ by at most gradient plus twice the noise cap") {
  const WeatherParams p;
  const EnvironmentModel model(99, p, five_regions(), kYear);
  const GeoPoint pa{46.0, 47.0}, pb{54.0, 53.0};
  auto a = model.sampler(3, 21, pa, kPeriod);
  auto b = model.sampler(3, 22, pb, kPeriod);
  const double gradient = std::fabs(p.gradient_x_c_per_km * (pa.x_km - pb.x_km) +
                                    p.gradient_y_c_per_km * (pa.y_km - pb.y_km));
  const double bound = gradient + 2.0 * p.noise_cap_c;
  double worst = 0.0;
  for (Seconds t = 0; t < kYear.seconds(); t += kPeriod) {
    const double ta = a.sample_truth(SimTime(t)).values.temperature_c;
    const double tb = b.sample_truth(SimTime(t)).values.temperature_c;
    worst = std::max(worst, std::fabs(ta - tb));
  }
  CHECK(worst <= bound + 1e-9);
}

TEST_CASE("consecutive half-hour samples change slowly and stay in range") {
  const WeatherParams p;
  const EnvironmentModel model(5, p, five_regions(), kYear);
  for (RegionId id = 1; id <= 5; ++id) {
    auto s = model.sampler(id, id * 10 + 1, model.region(id).area.centroid(), kPeriod);
    double prev = s.sample_truth(SimTime(0)).values.temperature_c;
    for (Seconds t = kPeriod; t < kYear.seconds(); t += kPeriod) {
      const auto r = s.sample_truth(SimTime(t));
      CHECK(std::fabs(r.values.temperature_c - prev) <= p.max_step_c + 1e-12);
      prev = r.values.temperature_c;
      if (r.values.precipitation_mm < 0.0 || r.values.humidity_pct < 0.0 ||
          r.values.humidity_pct > 100.0 || r.values.wind_dir_deg < 0.0 ||
          r.values.wind_dir_deg >= 360.0) {
        FAIL("reading out of range at t=" << t);
      }
    }
  }
}

TEST_CASE("annual rain matches twelve monthly normals times scale within 10 percent") {
  const EnvironmentModel model(11, WeatherParams{}, five_regions(), kYear);
  const double normal = Climatology{}.annual_precip_mm();
  for (RegionId id = 1; id <= 5; ++id) {
    const double scale = model.region(id).drought.precipitation_scale;
    auto s = model.sampler(id, id * 10 + 2, model.region(id).area.centroid(), kPeriod);
    double total = 0.0;
    for (Seconds t = 0; t < kYear.seconds(); t += kPeriod) {
      total += s.sample_truth(SimTime(t)).values.precipitation_mm;
    }
    if (scale == 0.0) {
      CHECK(total == 0.0);
    } else {
      CHECK(std::fabs(total - normal * scale) <= 0.10 * normal * scale);
    }
  }
}

TEST_CASE("same seed gives identical truth, different seed does not") {
  auto run = [](std::uint64_t seed) {
    const EnvironmentModel model(seed, WeatherParams{}, five_regions(), SimTime(30 * sim::kSecondsPerDay));
    std::ostringstream out;
    write_truth_dump(model, SimTime(30 * sim::kSecondsPerDay), kPeriod, out);
    return out.str();
  };
  const auto a = run(3);
  CHECK(a == run(3));
  CHECK(a != run(4));
  CHECK(a.rfind("region_id,day,temp_min_c,temp_max_c,temp_mean_c,precip_total_mm\n", 0) == 0);
}

TEST_CASE("environment error paths") {
  const EnvironmentModel model(1, WeatherParams{}, five_regions(), kYear);
  CHECK_THROWS_AS(model.sampler(9, 1, {0, 0}, kPeriod), UnknownRegion);
  CHECK_THROWS_AS(model.precipitation_between(9, SimTime(0), SimTime(10)), UnknownRegion);
  DroughtScenario bad;
  bad.precipitation_scale = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("drought anomaly ramps in when it starts late") {
  DroughtScenario d;
  d.temperature_anomaly_c = 2.0;
  d.active_start = SimTime(1000);
  CHECK(scenario_anomaly_c(d, SimTime(999), 100) == 0.0);
  CHECK(scenario_anomaly_c(d, SimTime(1050), 100) == doctest::Approx(1.0));
  CHECK(scenario_anomaly_c(d, SimTime(5000), 100) == doctest::Approx(2.0));
}
