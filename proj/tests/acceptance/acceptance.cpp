// Acceptance gate. Each criterion prints one PASS/FAIL line with the
// measured numbers; the exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unistd.h>
#include <vector>

#include <fmt/format.h>

#include "drought/analytics/analytics.hpp"
#include "drought/coverage/planner.hpp"
#include "drought/errors.hpp"
#include "drought/scenario/config.hpp"
#include "drought/scenario/run.hpp"
#include "drought/sim/kernel.hpp"
#include "properties/protocol_checks.hpp"

namespace fs = std::filesystem;
using namespace drought;
using analytics::SeverityClass;

namespace {

// Pinned tolerances and budgets.
constexpr double kYearRunBudgetS = 60.0;
constexpr double kFootprintRelTol = 0.005;
constexpr double kCircleFootprintKm2 = 10.18;
constexpr double kHexFootprintKm2 = 11.17;
constexpr double kCircleRangeKm = 1.80;
constexpr double kHexRangeKm = 2.074;
constexpr double kRegionAreaKm2 = 100.0;
constexpr std::size_t kNodesPerRegion = 10;
constexpr Seconds kEnergyHorizonS = 30 * sim::kSecondsPerDay;
constexpr Seconds kReplayHorizonS = 60 * sim::kSecondsPerDay;
constexpr int kPropertyTopologies = 1000;
constexpr int kClassifierSamples = 10'000;
constexpr std::size_t kKernelEvents = 100'000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int number, std::string_view name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, fmt::format("threw: {}", e.what())};
  }
  if (!o.pass) ++failures;
  fmt::print("[{}] {} {}: {}\n", o.pass ? "PASS" : "FAIL", number, name, o.detail);
  std::fflush(stdout);
}

std::string class_list(const std::map<RegionId, SeverityClass>& classes) {
  std::string s;
  for (const auto& [id, c] : classes) s += fmt::format("{}{}={}", s.empty() ? "" : " ", id, analytics::severity_name(c));
  return s;
}

std::uint64_t expected_reports(const scenario::ScenarioConfig& cfg) {
  const std::uint64_t sources = cfg.regions.size() * (kNodesPerRegion - 1);
  return sources * static_cast<std::uint64_t>(cfg.horizon_s / cfg.reporting_period_s);
}

struct LossRun {
  std::uint64_t records = 0;
  std::uint64_t losses = 0;
};

LossRun lossy_year(double p) {
  auto cfg = scenario::default_config();
  cfg.link.loss_prob = p;
  scenario::Simulation sim(cfg);
  sim.simulate();
  return {sim.central().size(), sim.central().losses()};
}

double radio_energy_after_warmup(net::RoutingMode mode, std::uint64_t* delivered) {
  auto cfg = scenario::default_config();
  cfg.horizon_s = kEnergyHorizonS;
  cfg.routing = mode;
  scenario::Simulation sim(cfg);
  sim.start();
  sim.run_until(SimTime(2 * cfg.reporting_period_s - 1));
  const auto before = sim.network().total_energy();
  const auto records_before = sim.central().size();
  sim.finish();
  const auto after = sim.network().total_energy();
  *delivered = sim.central().size() - records_before;
  return (after.tx_mj + after.rx_mj) - (before.tx_mj + before.rx_mj);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every file in a and b, byte for byte; run_report.json minus wall_clock_s.
std::optional<std::string> compare_runs(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    if (!fs::exists(b / name)) return name + " missing in second run";
    if (name == scenario::files::kRunReport) {
      auto ja = nlohmann::json::parse(read_file(a / name));
      auto jb = nlohmann::json::parse(read_file(b / name));
      ja.erase("wall_clock_s");
      jb.erase("wall_clock_s");
      if (ja != jb) return name + " differs";
    } else if (read_file(a / name) != read_file(b / name)) {
      return name + " differs";
    }
  }
  return std::nullopt;
}

struct Note {
  std::uint32_t value = 0;
};
std::string_view payload_tag(const Note&) { return "note"; }

}  // namespace

int main() {
  fmt::print("acceptance: default scenario, seed {}\n", scenario::default_config().seed);

  // One default year run feeds criteria 1, 2 and 4.
  const auto cfg = scenario::default_config();
  const auto t0 = std::chrono::steady_clock::now();
  scenario::Simulation year(cfg);
  year.simulate();
  const auto year_report = year.report();
  const double year_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  report(1, "year-end classification", [&]() -> Outcome {
    const std::map<RegionId, SeverityClass> expected = {{1, SeverityClass::NonDrought},
                                                        {2, SeverityClass::Slight},
                                                        {3, SeverityClass::Serious},
                                                        {4, SeverityClass::Moderate},
                                                        {5, SeverityClass::NonDrought}};
    const bool ok = year_report.year_end == expected && year_s < kYearRunBudgetS;
    return {ok, fmt::format("{} in {:.1f} s (budget {} s, {} events)", class_list(year_report.year_end), year_s,
                            kYearRunBudgetS, year_report.events_processed)};
  });

  report(2, "wind-advection forecast", [&]() -> Outcome {
    bool monotone = true;
    std::string s;
    for (const auto& [id, f] : year_report.forecasts) {
      monotone = monotone && f.forecast >= f.current;
      s += fmt::format(" {}:{}->{}", id, analytics::severity_name(f.current), analytics::severity_name(f.forecast));
    }
    const auto r4 = year_report.forecasts.find(4);
    const bool ok = monotone && r4 != year_report.forecasts.end() && r4->second.forecast == SeverityClass::Serious;
    return {ok, fmt::format("region 4 forecast {}; never below current: {};{}",
                            r4 == year_report.forecasts.end() ? "missing" : analytics::severity_name(r4->second.forecast),
                            monotone ? "yes" : "no", s)};
  });

  report(3, "coverage arithmetic", []() -> Outcome {
    const double circle = coverage::footprint_area(coverage::CellShape::Circle, kCircleRangeKm);
    const double hex = coverage::footprint_area(coverage::CellShape::Hexagon, kHexRangeKm);
    const auto hex_nodes = coverage::estimate_node_count(kRegionAreaKm2, coverage::CellShape::Hexagon, kHexRangeKm);
    const auto circle_nodes =
        coverage::estimate_node_count(kRegionAreaKm2, coverage::CellShape::Circle, kCircleRangeKm);
    const double circle_err = std::abs(circle - kCircleFootprintKm2) / kCircleFootprintKm2;
    const double hex_err = std::abs(hex - kHexFootprintKm2) / kHexFootprintKm2;
    const bool ok = circle_err < kFootprintRelTol && hex_err < kFootprintRelTol && hex_nodes + 1 == kNodesPerRegion &&
                    hex_nodes <= circle_nodes;
    return {ok, fmt::format("circle {:.3f} km2 (err {:.2e}), hexagon {:.3f} km2 (err {:.2e}), nodes per region "
                            "hexagon {}+1, circle {}",
                            circle, circle_err, hex, hex_err, hex_nodes, circle_nodes)};
  });

  report(4, "report conservation", [&]() -> Outcome {
    const std::uint64_t expected = expected_reports(cfg);
    const auto lossless = year.central().size();
    bool ok = lossless == expected && year.central().losses() == 0;
    std::string s = fmt::format("expected {}; lossless tree {}", expected, lossless);
    for (double p : {0.1, 0.3}) {
      const auto r = lossy_year(p);
      ok = ok && r.records + r.losses == expected && r.losses > 0;
      s += fmt::format("; p={} {} + {} lost", p, r.records, r.losses);
    }
    return {ok, s};
  });

  report(5, "diffusion vs flooding radio energy", []() -> Outcome {
    std::uint64_t dd_records = 0;
    std::uint64_t flood_records = 0;
    const double dd = radio_energy_after_warmup(net::RoutingMode::DirectedDiffusion, &dd_records);
    const double flood = radio_energy_after_warmup(net::RoutingMode::Flooding, &flood_records);
    const bool ok = dd <= flood && dd_records > 0 && dd_records == flood_records;
    return {ok, fmt::format("tx+rx after two periods over {} days: diffusion {:.1f} mJ ({} records), flooding "
                            "{:.1f} mJ ({} records), ratio {:.3f}",
                            kEnergyHorizonS / sim::kSecondsPerDay, dd, dd_records, flood, flood_records, dd / flood)};
  });

  report(6, "protocol properties", []() -> Outcome {
    const auto r = testing::run_protocol_properties(kPropertyTopologies, 20240601);
    const bool ok = r.violations() == 0 && r.trees_built > 0 && r.diffusion_runs > 0 && r.reinforced_paths > 0;
    std::string s = fmt::format("{} topologies, {} trees, {} diffusion runs, {} reinforced paths, {} violations",
                                r.topologies, r.trees_built, r.diffusion_runs, r.reinforced_paths, r.violations());
    for (const auto& f : r.failures) s += "; " + f;
    return {ok, s};
  });

  report(7, "deterministic replay", []() -> Outcome {
    const fs::path root = fs::temp_directory_path() / fmt::format("droughtsim_acceptance_{}", ::getpid());
    fs::remove_all(root);
    auto c = scenario::default_config();
    c.horizon_s = kReplayHorizonS;
    c.link.loss_prob = 0.1;
    c.trace = true;
    scenario::run_scenario(c, root / "a");
    scenario::run_scenario(c, root / "b");
    const auto compared = scenario::replay(root / "a");
    const auto diff = compare_runs(root / "a", root / "b");
    fs::remove_all(root);
    return {!diff && !compared.empty(),
            fmt::format("replay matched {} files; fresh rerun {}", compared.size(), diff ? *diff : "identical")};
  });

  report(8, "classifier", []() -> Outcome {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> anomaly(-3.0, 5.0);
    std::uniform_real_distribution<double> precip(0.0, 120.0);
    std::uniform_real_distribution<double> step(0.0, 3.0);
    int violations = 0;
    for (int i = 0; i < kClassifierSamples; ++i) {
      const double a = anomaly(rng);
      const double p = precip(rng);
      const auto base = analytics::classify(a, p);
      if (analytics::classify(a + step(rng), p) < base) ++violations;
      if (analytics::classify(a, std::max(0.0, p - 20.0 * step(rng))) < base) ++violations;
    }
    const analytics::Thresholds t;
    const bool boundaries = analytics::classify(2.5, t.precip_serious_mm, t) == SeverityClass::Moderate &&
                            analytics::classify(t.anomaly_serious_c, 1.0, t) == SeverityClass::Moderate &&
                            analytics::classify(1.5, t.precip_moderate_mm, t) == SeverityClass::Slight &&
                            analytics::classify(t.anomaly_moderate_c, 10.0, t) == SeverityClass::Slight &&
                            analytics::classify(0.0, t.precip_slight_mm, t) == SeverityClass::NonDrought &&
                            analytics::classify(t.anomaly_slight_c, 80.0, t) == SeverityClass::NonDrought;
    bool rejected = false;
    analytics::Thresholds bad;
    bad.precip_serious_mm = 30.0;
    try {
      analytics::classify(1.0, 1.0, bad);
    } catch (const InvalidThresholds&) {
      rejected = true;
    }
    return {violations == 0 && boundaries && rejected,
            fmt::format("{} samples, {} monotonicity violations; boundaries {}; bad thresholds {}",
                        kClassifierSamples, violations, boundaries ? "ok" : "wrong",
                        rejected ? "rejected" : "accepted")};
  });

  report(9, "kernel ordering", []() -> Outcome {
    sim::Kernel<Note> kernel;
    std::mt19937_64 rng(7);
    constexpr std::uint32_t kTargets = 8;
    std::vector<std::tuple<std::uint64_t, std::uint64_t>> scheduled;
    std::vector<std::tuple<std::uint64_t, std::uint64_t>> processed;
    std::uniform_int_distribution<std::uint32_t> target(0, kTargets - 1);
    std::uniform_int_distribution<Seconds> delay(0, 20);
    // Handlers schedule follow-ups (often at the current tick) until the
    // total reaches kKernelEvents.
    const auto handler = [&](const sim::Delivery<Note>& d) {
      processed.emplace_back(d.at.seconds(), d.seq);
      if (scheduled.size() < kKernelEvents) {
        const SimTime at = d.at + delay(rng);
        scheduled.emplace_back(at.seconds(), kernel.schedule(at, sim::sensor_node(target(rng)), Note{}));
      }
    };
    for (std::uint32_t i = 0; i < kTargets; ++i) kernel.add_entity(sim::sensor_node(i), handler);
    std::uniform_int_distribution<Seconds> start(0, 2000);
    for (std::size_t i = 0; i < kKernelEvents / 2; ++i) {
      const SimTime at(start(rng));
      scheduled.emplace_back(at.seconds(), kernel.schedule(at, sim::sensor_node(target(rng)), Note{}));
    }
    kernel.run_until(SimTime::max());
    auto oracle = scheduled;
    std::sort(oracle.begin(), oracle.end());
    std::size_t ties = 0;
    for (std::size_t i = 1; i < oracle.size(); ++i) ties += std::get<0>(oracle[i]) == std::get<0>(oracle[i - 1]);
    const bool ok = processed == oracle && processed.size() == kKernelEvents;
    return {ok, fmt::format("{} events, {} sharing a timestamp with their predecessor, order {}", processed.size(),
                            ties, processed == oracle ? "matches the sort oracle" : "differs")};
  });

  fmt::print("acceptance: {} of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
