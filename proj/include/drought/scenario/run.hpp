#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "drought/analytics/analytics.hpp"
#include "drought/coverage/planner.hpp"
#include "drought/env/environment.hpp"
#include "drought/net/network.hpp"
#include "drought/scenario/config.hpp"
#include "drought/store/backbone.hpp"
#include "drought/store/database.hpp"

namespace drought::scenario {

struct RegionSummary {
  RegionId id = 0;
  std::size_t nodes = 0;
  NodeId sink = 0;
  unsigned max_depth = 0;
  std::size_t records = 0;
};

struct MonthlyPoint {
  RegionId region = 0;
  unsigned month = 0;
  double value = 0.0;
  std::size_t samples = 0;  // timestamps contributing

  friend bool operator==(const MonthlyPoint&, const MonthlyPoint&) = default;
};

struct NodeEnergyRow {
  NodeId node = 0;
  RegionId region = 0;
  net::EnergyLedger energy;
};

struct RunReport {
  ScenarioConfig config;
  bool complete = false;
  std::vector<RegionSummary> regions;

  std::uint64_t events_processed = 0;
  net::NodeCounters network;
  net::EnergyLedger network_energy;
  std::vector<NodeEnergyRow> node_energy;
  std::uint64_t reports_emitted = 0;
  std::uint64_t reports_lost = 0;  // link loss or queue overflow inside the sensor tier
  std::uint64_t reports_stranded = 0;  // still queued when the run ended
  std::uint64_t query_responses = 0;

  store::LocalCounters backbone;
  std::uint64_t central_records = 0;
  std::uint64_t central_duplicates = 0;
  std::uint64_t central_losses = 0;

  std::vector<analytics::EvolutionPattern> patterns;
  std::map<RegionId, analytics::DroughtIndicators> summary;  // one window over the whole span
  std::map<RegionId, analytics::SeverityClass> year_end;
  std::map<RegionId, analytics::Forecast> forecasts;
  std::vector<MonthlyPoint> monthly_temperature;
  std::vector<MonthlyPoint> monthly_precipitation;
  std::vector<std::string> notes;

  double wall_clock_s = 0.0;

  nlohmann::json to_json() const;
};

// One scenario's live objects. Construction plans the regions and wires the
// tiers together; simulate() runs the kernel until nothing is left to do.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig cfg, std::ostream* trace = nullptr);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void simulate();
  // simulate() in pieces: start(), any number of run_until(), finish().
  void start();
  void run_until(SimTime t);
  void finish();
  // Analytics over the central database; call after simulate().
  RunReport report() const;

  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<coverage::PlacementPlan>& placements() const { return plans_; }
  const std::vector<net::RegionTopology>& topologies() const { return topologies_; }
  const env::EnvironmentModel& environment() const { return *env_; }
  Kernel& kernel() { return kernel_; }
  const net::SensorNetwork& network() const { return *network_; }
  net::SensorNetwork& network() { return *network_; }
  const store::CentralDatabase& central() const { return central_; }
  const store::Backbone& backbone() const { return *backbone_; }

  nlohmann::json placement_json() const;

 private:
  ScenarioConfig cfg_;
  std::vector<coverage::PlacementPlan> plans_;
  std::vector<net::RegionTopology> topologies_;
  std::unique_ptr<env::EnvironmentModel> env_;
  Kernel kernel_;
  std::unique_ptr<net::SensorNetwork> network_;
  store::CentralDatabase central_;
  std::unique_ptr<store::Backbone> backbone_;
  bool started_ = false;
  bool simulated_ = false;
};

// Placement for every configured region (no simulation).
std::vector<coverage::PlacementPlan> plan_regions(const ScenarioConfig& cfg);

// Runs the analytics half of the pipeline on an existing database.
struct AnalyticsResult {
  std::vector<analytics::EvolutionPattern> patterns;
  std::map<RegionId, analytics::DroughtIndicators> summary;
  std::map<RegionId, analytics::SeverityClass> year_end;
  std::map<RegionId, analytics::Forecast> forecasts;
  std::vector<MonthlyPoint> monthly_temperature;
  std::vector<MonthlyPoint> monthly_precipitation;
  std::vector<std::string> notes;
};
AnalyticsResult analyze(const ScenarioConfig& cfg, const store::CentralDatabase& db);

// Calendar-month (horizon / 12 of a year) series; precipitation is summed,
// temperature averaged.
std::vector<MonthlyPoint> monthly_series(const store::CentralDatabase& db, RegionId region, Field field,
                                         Seconds horizon_s);
void write_monthly_csv(const std::vector<MonthlyPoint>& series, std::string_view value_column, std::ostream& out);
std::vector<MonthlyPoint> read_monthly_csv(std::istream& in);

// Output file names, fixed.
namespace files {
inline constexpr const char* kPlacement = "placement.json";
inline constexpr const char* kTrace = "trace.tsv";
inline constexpr const char* kCentralDb = "central_db.csv";
inline constexpr const char* kDbSummary = "db_summary.json";
inline constexpr const char* kEnergy = "energy.csv";
inline constexpr const char* kEnergyPerNode = "energy_per_node.csv";
inline constexpr const char* kPattern = "pattern.csv";
inline constexpr const char* kForecast = "forecast.json";
inline constexpr const char* kMonthlyTemperature = "monthly_temperature.csv";
inline constexpr const char* kMonthlyPrecipitation = "monthly_precipitation.csv";
inline constexpr const char* kRunReport = "run_report.json";
}  // namespace files

// The full pipeline: simulate, analyze, write every export into `out_dir`.
// On failure a run_report.json with "complete": false and the error is left
// behind before the exception propagates.
RunReport run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// Writes placement.json only.
void write_plan(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// Analytics on an exported central_db.csv; writes pattern.csv, forecast.json
// and the monthly series into `out_dir`.
AnalyticsResult classify_export(const ScenarioConfig& cfg, const std::filesystem::path& db_csv,
                                const std::filesystem::path& out_dir);

// Re-runs the configuration echoed in `run_dir`/run_report.json and compares
// every export byte for byte (run report minus wall_clock_s). Throws
// ReplayMismatch naming the first differing file and line.
std::vector<std::string> replay(const std::filesystem::path& run_dir);

// Independent seeds seed, seed+1, ... into out_dir/seed_<n>, at most
// `threads` at a time.
std::vector<RunReport> run_batch(const ScenarioConfig& cfg, unsigned runs, const std::filesystem::path& out_dir,
                                 unsigned threads);

// --out flag beats $DROUGHTSIM_OUT beats the config file.
std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg, const std::optional<std::string>& flag);

}  // namespace drought::scenario
