#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "drought/net/packet.hpp"
#include "drought/scenario/run.hpp"

using namespace drought;
using namespace drought::scenario;

namespace {

ScenarioConfig days(Seconds d) {
  auto cfg = parse_config("", "<test>");
  cfg.horizon_s = d * sim::kSecondsPerDay;
  return cfg;
}

std::map<std::string, std::uint64_t> count_tags(const std::string& trace) {
  std::map<std::string, std::uint64_t> counts;
  std::istringstream in(trace);
  std::string line;
  while (std::getline(in, line)) counts[line.substr(line.rfind('\t') + 1)]++;
  return counts;
}

}  // namespace

TEST_CASE("event counts match the per-report oracle") {
  const Seconds d = 3;
  std::ostringstream trace;
  Simulation sim(days(d), &trace);
  sim.simulate();
  const auto& net = sim.network();
  const auto totals = net.totals();
  const std::uint64_t cycles = d * sim::kSecondsPerDay / 1800;

  // Frames per report: a data message split into MAC frames.
  SensorReading reading;
  const auto bytes = net::encode(net::make_data_message(net::kTreeReport, reading, {}, 0));
  const std::uint64_t frames_per_report = net::fragment_count(bytes.size(), sim.config().mac.max_frame_bytes);
  std::uint64_t depth_sum = 0;
  std::uint64_t sensing = 0;
  for (const auto& topo : sim.topologies()) {
    for (std::size_t i = 1; i < topo.tree.depth.size(); ++i) {
      depth_sum += topo.tree.depth[i];
      ++sensing;
    }
  }
  const std::uint64_t reports = sensing * cycles;
  const std::uint64_t frames = frames_per_report * depth_sum * cycles;

  const auto tags = count_tags(trace.str());
  CHECK(tags.at("wake") == net.node_count() * cycles);
  CHECK(tags.at("sleep") == net.node_count() * cycles);
  CHECK(tags.at("frame") == frames);
  CHECK(totals.frames_sent == frames);
  CHECK(tags.at("mac_try") == totals.frames_sent + totals.mac_deferrals + totals.mac_postponed);
  for (const char* tag : {"sink_handoff", "uplink", "uplink_ack", "retransmit"}) CHECK(tags.at(tag) == reports);
  CHECK(sim.kernel().processed() ==
        2 * net.node_count() * cycles + frames + tags.at("mac_try") + 4 * reports);
  CHECK(sim.central().size() == reports);
  CHECK(totals.mac_postponed == 0);
}

TEST_CASE("two fresh runs with the same seed produce identical exports") {
  const auto run = [](std::uint64_t seed) {
    auto cfg = days(35);
    cfg.seed = seed;
    cfg.link.loss_prob = 0.05;
    Simulation sim(cfg);
    sim.simulate();
    std::ostringstream db;
    sim.central().write_csv(db);
    std::ostringstream energy;
    sim.network().write_energy_csv(energy);
    auto report = sim.report().to_json();
    report.erase("wall_clock_s");
    return db.str() + energy.str() + report.dump();
  };
  const auto a = run(9);
  CHECK(a == run(9));
  CHECK(a != run(10));
}

TEST_CASE("every routing mode completes a short default run") {
  for (auto mode : {net::RoutingMode::Tree, net::RoutingMode::DirectedDiffusion, net::RoutingMode::Combined,
                    net::RoutingMode::Flooding}) {
    CAPTURE(net::routing_name(mode));
    auto cfg = days(2);
    cfg.routing = mode;
    Simulation sim(cfg);
    sim.simulate();
    const auto& c = sim.central();
    // Diffusion misses each node's first reading, taken before the interest
    // has reached it.
    const std::uint64_t expected = 45 * 96;
    CHECK(c.size() + c.losses() + c.duplicates() >= expected - 45);
    CHECK(c.size() <= expected);
    CHECK(c.losses() == 0);
  }
}
