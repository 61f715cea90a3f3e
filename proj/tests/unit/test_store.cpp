#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "drought/errors.hpp"
#include "drought/store/backbone.hpp"

using namespace drought;
using namespace drought::store;

namespace {

StoredRecord record(RegionId region, NodeId node, std::uint64_t t, double temp) {
  StoredRecord r;
  r.timestamp = SimTime(t);
  r.node_id = node;
  r.region_id = region;
  r.raw.node_id = node;
  r.raw.region_id = region;
  r.raw.timestamp = r.timestamp;
  r.raw.values.temperature_c = temp;
  r.raw.values.precipitation_mm = 0.1 * static_cast<double>(node);
  r.raw.values.humidity_pct = 40.0 + static_cast<double>(node);
  r.raw.values.pressure_hpa = 1013.25;
  r.raw.values.wind_speed_ms = 3.3;
  r.raw.values.wind_dir_deg = 123.456789;
  r.raw.values.groundwater_m = 7.0 + 1.0 / 3.0;
  r.calibrated = r.raw;
  r.health = {1234.5678, 3};
  r.location = {1.0 / 7.0, 2.5};
  r.route_parent = node == 0 ? kNoNode : node - 1;
  r.hop_count = static_cast<std::uint8_t>(node);
  return r;
}

net::DataMessage message(NodeId node, std::uint64_t t) {
  SensorReading reading;
  reading.node_id = node;
  reading.timestamp = SimTime(t);
  reading.values.temperature_c = 20.0;
  return net::make_data_message(1, reading, {}, kNoNode);
}

struct Uplink {
  Kernel kernel;
  CentralDatabase central;
  std::unique_ptr<Backbone> backbone;

  Uplink(BackboneParams params, std::uint64_t seed = 11) {
    std::vector<StationSite> sites = {{1, {5, 95}}, {2, {95, 95}}, {3, {50, 50}}, {4, {95, 5}}, {5, {5, 5}}};
    backbone = std::make_unique<Backbone>(kernel, central, params, Calibration{}, sites, GeoPoint{50, 50},
                                          std::map<NodeId, GeoPoint>{}, seed);
  }

  void handoff(RegionId region, NodeId node, std::uint64_t t) {
    kernel.schedule(SimTime(t), sim::local_base_station(region), SinkHandoff{message(node, t), node});
  }
};

}  // namespace

TEST_CASE("identity calibration leaves readings untouched") {
  Calibration cal;
  CHECK(cal.is_identity());
  const auto r = record(1, 3, 1800, 21.5);
  CHECK(cal.apply(r.raw) == r.raw);
}

TEST_CASE("affine calibration wraps direction and clamps physical ranges") {
  Calibration cal;
  cal.fields[static_cast<std::size_t>(Field::Temperature)] = {1.0, 0.5};
  cal.fields[static_cast<std::size_t>(Field::WindDirection)] = {1.0, 300.0};
  cal.fields[static_cast<std::size_t>(Field::Precipitation)] = {1.0, -5.0};
  cal.fields[static_cast<std::size_t>(Field::Humidity)] = {2.0, 0.0};
  CHECK_FALSE(cal.is_identity());
  auto raw = record(1, 3, 1800, 20.0).raw;
  raw.values.humidity_pct = 70.0;
  const auto c = cal.apply(raw);
  CHECK(c.values.temperature_c == 20.5);
  CHECK(c.values.wind_dir_deg == doctest::Approx(63.456789));
  CHECK(c.values.precipitation_mm == 0.0);
  CHECK(c.values.humidity_pct == 100.0);
  // Same input, same output.
  CHECK(cal.apply(raw) == c);
}

TEST_CASE("duplicate keys are rejected and counted") {
  CentralDatabase db;
  CHECK(db.insert(record(1, 2, 1800, 20.0)));
  CHECK_FALSE(db.insert(record(1, 2, 1800, 25.0)));
  CHECK(db.size() == 1);
  CHECK(db.duplicates() == 1);
  CHECK(db.records()[0].raw.values.temperature_c == 20.0);
  CHECK(db.contains({1, 2, SimTime(1800)}));
  CHECK_FALSE(db.contains({1, 2, SimTime(3600)}));
}

TEST_CASE("query_window averages nodes per timestamp") {
  CentralDatabase db;
  SUBCASE("empty store gives an empty series") {
    CHECK(db.query_window(1, Field::Temperature, {SimTime(0), SimTime(86400)}).empty());
  }
  SUBCASE("single record") {
    db.insert(record(1, 0, 1800, 17.25));
    const auto s = db.query_window(1, Field::Temperature, {SimTime(0), SimTime(86400)});
    REQUIRE(s.size() == 1);
    CHECK(s[0].value == 17.25);
    CHECK(s[0].nodes == 1);
  }
  SUBCASE("mean oracle across nodes and the half-open window") {
    // Out-of-order inserts must still come back sorted.
    for (std::uint64_t t : {5400u, 1800u, 3600u, 0u}) {
      for (NodeId n = 0; n < 4; ++n) db.insert(record(1, n, t, static_cast<double>(t) / 1800.0 + n));
    }
    db.insert(record(2, 0, 1800, 99.0));
    const auto s = db.query_window(1, Field::Temperature, {SimTime(1800), SimTime(5400)});
    REQUIRE(s.size() == 2);
    CHECK(s[0].timestamp == SimTime(1800));
    CHECK(s[0].value == doctest::Approx(1.0 + 1.5));
    CHECK(s[1].timestamp == SimTime(3600));
    CHECK(s[1].value == doctest::Approx(2.0 + 1.5));
    CHECK(s[1].nodes == 4);
    CHECK(db.region_count(1) == 16);
    CHECK(db.span(1)->start == SimTime(0));
    CHECK(db.span(1)->end == SimTime(5401));
  }
}

TEST_CASE("wind direction uses the circular mean") {
  CHECK(circular_mean_deg({350.0, 10.0}) == 0.0);
  CHECK(circular_mean_deg({80.0, 100.0}) == doctest::Approx(90.0));
  CentralDatabase db;
  auto a = record(1, 0, 1800, 0);
  auto b = record(1, 1, 1800, 0);
  a.calibrated.values.wind_dir_deg = 350.0;
  b.calibrated.values.wind_dir_deg = 10.0;
  db.insert(a);
  db.insert(b);
  const auto s = db.query_window(1, Field::WindDirection, {SimTime(0), SimTime(3600)});
  REQUIRE(s.size() == 1);
  CHECK(s[0].value == 0.0);
}

TEST_CASE("CSV round trip is bit exact") {
  CentralDatabase db;
  for (NodeId n = 0; n < 5; ++n) db.insert(record(1 + n % 2, n, 1800 * (n + 1), 0.1 + n / 3.0));
  std::stringstream first;
  db.write_csv(first);
  auto back = CentralDatabase::read_csv(first);
  REQUIRE(back.size() == db.size());
  for (std::size_t i = 0; i < db.size(); ++i) CHECK(back.records()[i] == db.records()[i]);
  std::stringstream second;
  back.write_csv(second);
  CHECK(second.str() == first.str());
}

TEST_CASE("CSV parse errors carry the line number") {
  std::stringstream bad;
  CentralDatabase db;
  db.insert(record(1, 0, 1800, 1.0));
  db.write_csv(bad);
  std::string text = bad.str();
  text += "1800,not-a-node\n";
  std::stringstream in(text);
  try {
    CentralDatabase::read_csv(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("backbone link budget") {
  CHECK(backbone_link_budget({0, 0}, {100, 0}).in_range);
  CHECK(backbone_link_budget({0, 0}, {0, 0}).in_range);
  CHECK(backbone_link_budget({0, 0}, {0, 0}).distance_km == 0.0);
  const auto far = backbone_link_budget({0, 0}, {130, 0});
  CHECK_FALSE(far.in_range);
  CHECK(far.distance_km == 130.0);
}

TEST_CASE("backbone routes take the fewest hops") {
  const std::vector<StationSite> sites = {{1, {0, 0}}, {2, {100, 0}}, {3, {200, 0}}};
  const auto routes = backbone_routes(sites, GeoPoint{0, 10}, 120.0);
  CHECK(routes.at(1) == std::vector<RegionId>{0});
  CHECK(routes.at(2) == std::vector<RegionId>{0});
  CHECK(routes.at(3) == std::vector<RegionId>{2, 0});
  CHECK_THROWS_AS(backbone_routes({{1, {500, 0}}}, GeoPoint{0, 0}, 120.0), ValidationError);
}

TEST_CASE("lossless uplink stores every record once") {
  Uplink u(BackboneParams{});
  for (RegionId r = 1; r <= 5; ++r) {
    for (NodeId n = 1; n < 10; ++n) u.handoff(r, n, 1800);
  }
  u.handoff(3, 1, 1800);  // same key again
  u.kernel.run_until(SimTime(10'000));
  CHECK(u.central.size() == 45);
  const auto t = u.backbone->totals();
  CHECK(t.ingested == 45);
  CHECK(t.duplicates == 1);
  CHECK(t.retransmissions == 0);
  CHECK(u.backbone->in_flight() == 0);
  // handoff, segment, ack and timer per record plus the rejected duplicate.
  CHECK(u.kernel.processed() == 45 * 4 + 1);
}

TEST_CASE("lossy uplink recovers through retransmission") {
  BackboneParams p;
  p.loss_prob = 0.3;
  p.max_retries = 30;
  Uplink u(p);
  for (std::uint64_t k = 0; k < 200; ++k) u.handoff(1 + k % 5, 1 + k % 9, 1800 * (k + 1));
  u.kernel.run_until(SimTime(10'000'000));
  const auto t = u.backbone->totals();
  CHECK(u.central.size() == 200);
  CHECK(t.abandoned == 0);
  CHECK(t.retransmissions > 0);
  CHECK(t.segments_lost == t.retransmissions);
  CHECK(u.backbone->in_flight() == 0);
}

TEST_CASE("uplink gives up after max_retries and records the loss") {
  BackboneParams p;
  p.loss_prob = 0.9;
  p.max_retries = 1;
  Uplink u(p);
  for (std::uint64_t k = 0; k < 100; ++k) u.handoff(1, 1, 1800 * (k + 1));
  u.kernel.run_until(SimTime(10'000'000));
  const auto t = u.backbone->totals();
  CHECK(t.abandoned > 0);
  CHECK(u.central.size() + t.abandoned == 100);
  CHECK(u.central.losses() == t.abandoned);
  CHECK(u.backbone->abandoned().size() == t.abandoned);
  CHECK(t.transmissions <= 200);
}

TEST_CASE("local eviction never drops unacknowledged records") {
  BackboneParams p;
  p.local_capacity = 5;
  p.loss_prob = 0.5;
  p.max_retries = 40;
  Uplink u(p);
  for (std::uint64_t k = 0; k < 60; ++k) u.handoff(2, 1, 60 * (k + 1));
  u.kernel.run_until(SimTime(10'000'000));
  const auto& c = u.backbone->counters(2);
  CHECK(c.evicted_unacked == 0);
  CHECK(c.evicted > 0);
  CHECK(u.central.size() == 60);
  CHECK(u.backbone->local_size(2) >= 5);
}

TEST_CASE("backbone parameter validation") {
  BackboneParams p;
  p.loss_prob = 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.local_capacity = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.range_km = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
