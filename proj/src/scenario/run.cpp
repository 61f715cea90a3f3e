#include "drought/scenario/run.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "drought/errors.hpp"

namespace drought::scenario {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  body(out);
  out.flush();
  if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json ledger_json(const net::EnergyLedger& e) {
  return {{"tx_mJ", e.tx_mj}, {"rx_mJ", e.rx_mj}, {"idle_mJ", e.idle_mj}, {"sensing_mJ", e.sensing_mj},
          {"total_mJ", e.total_mj()}};
}

nlohmann::json monthly_json(const std::vector<MonthlyPoint>& series) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : series) {
    out.push_back({{"region", p.region}, {"month", p.month}, {"value", p.value}, {"samples", p.samples}});
  }
  return out;
}

void write_analytics(const AnalyticsResult& a, const fs::path& dir) {
  write_file(dir / files::kPattern, [&](std::ostream& o) { analytics::write_pattern_csv(a.patterns, o); });
  write_file(dir / files::kForecast,
             [&](std::ostream& o) { o << analytics::forecast_json(a.forecasts).dump(2) << '\n'; });
  write_file(dir / files::kMonthlyTemperature,
             [&](std::ostream& o) { write_monthly_csv(a.monthly_temperature, "mean_temp_c", o); });
  write_file(dir / files::kMonthlyPrecipitation,
             [&](std::ostream& o) { write_monthly_csv(a.monthly_precipitation, "precip_mm", o); });
}

}  // namespace

std::vector<coverage::PlacementPlan> plan_regions(const ScenarioConfig& cfg) {
  std::vector<coverage::PlacementPlan> plans;
  for (const auto& r : cfg.regions) {
    const Rect area = coverage::region_square(r.anchor, r.side_km);
    const std::size_t nodes = cfg.nodes_per_region != 0
                                  ? cfg.nodes_per_region
                                  : coverage::estimate_node_count(area.area(), cfg.cell_shape, cfg.radio_range_km) + 1;
    auto plan = coverage::tile_region(r.id, area, cfg.cell_shape, cfg.radio_range_km, nodes);
    const auto conn = coverage::connectivity_check(plan);
    if (!conn.all_reach_sink) {
      throw PlacementInfeasible(fmt::format("region {}: {} node(s) cannot reach the sink at link range {} km", r.id,
                                            conn.unreachable.size(), plan.link_range_km()));
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

Simulation::Simulation(ScenarioConfig cfg, std::ostream* trace) : cfg_(std::move(cfg)) {
  cfg_.validate();
  plans_ = plan_regions(cfg_);
  std::map<RegionId, env::RegionClimate> climates;
  for (const auto& plan : plans_) {
    net::RegionTopology topo;
    topo.region = plan.region_id;
    topo.positions = plan.node_positions;
    topo.link_range_km = plan.link_range_km();
    topo.tree = net::build_binary_tree(plan.node_positions, topo.link_range_km);
    topologies_.push_back(std::move(topo));
    const auto& rc = cfg_.region(plan.region_id);
    climates[plan.region_id] = env::RegionClimate{plan.area, rc.climatology, rc.drought};
  }
  env_ = std::make_unique<env::EnvironmentModel>(cfg_.seed, cfg_.weather, climates, SimTime(cfg_.horizon_s));
  kernel_.set_trace(trace);
  network_ = std::make_unique<net::SensorNetwork>(kernel_, *env_, cfg_.network_config(), topologies_);

  std::map<NodeId, GeoPoint> locations;
  for (NodeId id = 0; id < network_->node_count(); ++id) locations[id] = network_->info(id).position;
  std::vector<store::StationSite> stations;
  for (const auto& plan : plans_) stations.push_back({plan.region_id, plan.sink_position});
  backbone_ = std::make_unique<store::Backbone>(kernel_, central_, cfg_.backbone, cfg_.calibration, stations,
                                                cfg_.remote_position, std::move(locations), cfg_.seed);
}

Simulation::~Simulation() = default;

void Simulation::start() {
  if (started_) throw Error("simulation already started");
  started_ = true;
  network_->start();
}

void Simulation::run_until(SimTime t) {
  if (!started_) start();
  kernel_.run_until(t);
}

void Simulation::finish() {
  if (simulated_) throw Error("simulation already finished");
  // No wake is scheduled at or past the horizon, so the queue drains on its
  // own once the last active windows and uplinks finish.
  run_until(SimTime::max());
  simulated_ = true;
  central_.record_losses(network_->lost_reports().size() + network_->stranded_reports().size());
}

void Simulation::simulate() {
  start();
  finish();
}

nlohmann::json Simulation::placement_json() const {
  nlohmann::json regions = nlohmann::json::array();
  for (std::size_t i = 0; i < plans_.size(); ++i) {
    auto j = coverage::to_json(plans_[i]);
    const auto& tree = topologies_[i].tree;
    nlohmann::json parents = nlohmann::json::array();
    for (const auto& p : tree.parent) parents.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
    j["tree_parent"] = parents;
    j["tree_depth"] = tree.depth;
    regions.push_back(std::move(j));
  }
  return {{"regions", regions},
          {"remote_position", {cfg_.remote_position.x_km, cfg_.remote_position.y_km}},
          {"backbone_range_km", cfg_.backbone.range_km}};
}

std::vector<MonthlyPoint> monthly_series(const store::CentralDatabase& db, RegionId region, Field field,
                                         Seconds horizon_s) {
  std::vector<MonthlyPoint> out;
  const Seconds month = env::kMonthSeconds;
  const Seconds months = (horizon_s + month - 1) / month;
  for (Seconds m = 0; m < months; ++m) {
    const TimeWindow w{SimTime(m * month), SimTime(std::min(horizon_s, (m + 1) * month))};
    const auto series = db.query_window(region, field, w);
    if (series.empty()) continue;
    double sum = 0.0;
    for (const auto& p : series) sum += p.value;
    const double value = field == Field::Precipitation ? sum : sum / static_cast<double>(series.size());
    out.push_back({region, static_cast<unsigned>(m), value, series.size()});
  }
  return out;
}

void write_monthly_csv(const std::vector<MonthlyPoint>& series, std::string_view value_column, std::ostream& out) {
  out << "region,month," << value_column << ",samples\n";
  for (const auto& p : series) out << fmt::format("{},{},{},{}\n", p.region, p.month, p.value, p.samples);
}

std::vector<MonthlyPoint> read_monthly_csv(std::istream& in) {
  std::vector<MonthlyPoint> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    MonthlyPoint p;
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    const auto field = [&](auto& v) {
      const auto [ptr, ec] = std::from_chars(cur, end, v);
      if (ec != std::errc()) throw ParseError(fmt::format("monthly series line {}: bad number", line_no));
      cur = ptr;
      if (cur != end) {
        if (*cur != ',') throw ParseError(fmt::format("monthly series line {}: expected ','", line_no));
        ++cur;
      }
    };
    field(p.region);
    field(p.month);
    field(p.value);
    field(p.samples);
    out.push_back(p);
  }
  return out;
}

AnalyticsResult analyze(const ScenarioConfig& cfg, const store::CentralDatabase& db) {
  AnalyticsResult a;
  for (const auto& r : cfg.regions) {
    const auto span = db.span(r.id);
    if (!span) {
      a.notes.push_back(fmt::format("region {}: no records", r.id));
      continue;
    }
    if (span->length() >= analytics::kMinWindow) {
      const auto ind = analytics::compute_indicators(db, r.id, *span, r.climatology);
      a.summary[r.id] = ind;
      a.year_end[r.id] = analytics::classify(ind, cfg.thresholds);
    } else {
      a.notes.push_back(fmt::format("region {}: span under 30 days, no summary class", r.id));
    }
    try {
      a.patterns.push_back(analytics::evolve_pattern(db, r.id, cfg.window_days, r.climatology, cfg.thresholds));
    } catch (const InsufficientSpan& e) {
      a.notes.push_back(fmt::format("region {}: no evolution pattern ({})", r.id, e.what()));
    }
    for (const auto& p : monthly_series(db, r.id, Field::Temperature, cfg.horizon_s)) {
      a.monthly_temperature.push_back(p);
    }
    for (const auto& p : monthly_series(db, r.id, Field::Precipitation, cfg.horizon_s)) {
      a.monthly_precipitation.push_back(p);
    }
  }
  if (!a.year_end.empty()) a.forecasts = analytics::advect_forecast(a.year_end, a.summary, cfg.anchors());
  return a;
}

RunReport Simulation::report() const {
  if (!simulated_) throw Error("report() before simulate()");
  RunReport r;
  r.config = cfg_;
  for (std::size_t i = 0; i < plans_.size(); ++i) {
    const auto& tree = topologies_[i].tree;
    const RegionId id = plans_[i].region_id;
    r.regions.push_back({id, plans_[i].node_positions.size(), network_->sink_of(id),
                         *std::max_element(tree.depth.begin(), tree.depth.end()), central_.region_count(id)});
  }
  r.events_processed = kernel_.processed();
  r.network = network_->totals();
  r.network_energy = network_->total_energy();
  for (NodeId id = 0; id < network_->node_count(); ++id) {
    r.node_energy.push_back({id, network_->info(id).region, network_->energy(id)});
  }
  r.reports_emitted = network_->reports_emitted();
  r.reports_lost = network_->lost_reports().size();
  r.reports_stranded = network_->stranded_reports().size();
  r.query_responses = network_->query_responses();
  r.backbone = backbone_->totals();
  r.central_records = central_.size();
  r.central_duplicates = central_.duplicates();
  r.central_losses = central_.losses();

  auto a = analyze(cfg_, central_);
  r.patterns = std::move(a.patterns);
  r.summary = std::move(a.summary);
  r.year_end = std::move(a.year_end);
  r.forecasts = std::move(a.forecasts);
  r.monthly_temperature = std::move(a.monthly_temperature);
  r.monthly_precipitation = std::move(a.monthly_precipitation);
  r.notes = std::move(a.notes);
  r.complete = true;
  return r;
}

nlohmann::json RunReport::to_json() const {
  using nlohmann::json;
  json regions_j = json::array();
  for (const auto& s : regions) {
    regions_j.push_back(
        {{"region", s.id}, {"nodes", s.nodes}, {"sink", s.sink}, {"max_depth", s.max_depth}, {"records", s.records}});
  }
  const auto& c = network;
  json year_end_j = json::object();
  for (const auto& [id, cls] : year_end) year_end_j[std::to_string(id)] = analytics::severity_name(cls);
  json summary_j = json::object();
  for (const auto& [id, ind] : summary) {
    summary_j[std::to_string(id)] = {{"window_start", ind.window.start.seconds()},
                                     {"window_end", ind.window.end.seconds()},
                                     {"anomaly_C", ind.mean_temp_anomaly_c},
                                     {"precip_mm", ind.mean_monthly_precip_mm},
                                     {"wind_dir_deg", ind.wind_mean_dir_deg},
                                     {"wind_speed_ms", ind.wind_mean_speed_ms},
                                     {"records", ind.records}};
  }
  json patterns_j = json::object();
  for (const auto& p : patterns) {
    json entries = json::array();
    for (const auto& e : p.entries) {
      entries.push_back({{"window_start", e.window.start.seconds()},
                         {"window_end", e.window.end.seconds()},
                         {"class", analytics::severity_name(e.severity)},
                         {"anomaly_C", e.indicators.mean_temp_anomaly_c},
                         {"precip_mm", e.indicators.mean_monthly_precip_mm}});
    }
    patterns_j[std::to_string(p.region_id)] = entries;
  }
  json energy_rows = json::array();
  for (const auto& row : node_energy) {
    auto e = ledger_json(row.energy);
    e["node_id"] = row.node;
    e["region"] = row.region;
    energy_rows.push_back(e);
  }
  const auto& b = backbone;
  return {
      {"complete", complete},
      {"seed", config.seed},
      {"config", scenario::to_json(config)},
      {"regions", regions_j},
      {"events_processed", events_processed},
      {"network",
       {{"frames_sent", c.frames_sent},
        {"frames_dropped", c.frames_dropped},
        {"frames_lost", c.frames_lost},
        {"frames_received", c.frames_received},
        {"asleep_drops", c.asleep_drops},
        {"reports_originated", c.reports_originated},
        {"reports_forwarded", c.reports_forwarded},
        {"duplicates_dropped", c.duplicates_dropped},
        {"mac_deferrals", c.mac_deferrals},
        {"mac_postponed", c.mac_postponed},
        {"reports_emitted", reports_emitted},
        {"reports_lost", reports_lost},
        {"reports_stranded", reports_stranded},
        {"query_responses", query_responses},
        {"energy", ledger_json(network_energy)}}},
      {"backbone",
       {{"ingested", b.ingested},
        {"duplicates", b.duplicates},
        {"evicted", b.evicted},
        {"capacity_overruns", b.capacity_overruns},
        {"transmissions", b.transmissions},
        {"retransmissions", b.retransmissions},
        {"segments_lost", b.segments_lost},
        {"abandoned", b.abandoned},
        {"evicted_unacked", b.evicted_unacked}}},
      {"central", {{"records", central_records}, {"duplicates", central_duplicates}, {"losses", central_losses}}},
      {"summary", summary_j},
      {"year_end", year_end_j},
      {"forecast", analytics::forecast_json(forecasts)},
      {"patterns", patterns_j},
      {"monthly_temperature", monthly_json(monthly_temperature)},
      {"monthly_precipitation", monthly_json(monthly_precipitation)},
      {"node_energy", energy_rows},
      {"notes", notes},
      {"wall_clock_s", wall_clock_s},
  };
}

RunReport run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir) {
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  std::ofstream trace;
  if (cfg.trace) {
    trace.open(out_dir / files::kTrace, std::ios::binary | std::ios::trunc);
    if (!trace) throw IoError(fmt::format("cannot write {}", (out_dir / files::kTrace).string()));
  }
  try {
    Simulation sim(cfg, cfg.trace ? &trace : nullptr);
    write_file(out_dir / files::kPlacement, [&](std::ostream& o) { o << sim.placement_json().dump(2) << '\n'; });
    sim.simulate();
    if (cfg.trace) {
      trace.flush();
      if (!trace) throw IoError("trace write failed");
    }
    RunReport report = sim.report();
    write_file(out_dir / files::kCentralDb, [&](std::ostream& o) { sim.central().write_csv(o); });
    write_file(out_dir / files::kDbSummary, [&](std::ostream& o) { o << sim.central().summary().dump(2) << '\n'; });
    write_file(out_dir / files::kEnergy, [&](std::ostream& o) { sim.network().write_energy_csv(o); });
    write_file(out_dir / files::kEnergyPerNode, [&](std::ostream& o) {
      o << "node_id,region,total_mJ\n";
      for (const auto& row : report.node_energy) o << fmt::format("{},{},{}\n", row.node, row.region, row.energy.total_mj());
    });
    AnalyticsResult a{report.patterns,          report.summary,
                      report.year_end,          report.forecasts,
                      report.monthly_temperature, report.monthly_precipitation,
                      report.notes};
    write_analytics(a, out_dir);
    report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file(out_dir / files::kRunReport, [&](std::ostream& o) { o << report.to_json().dump(2) << '\n'; });
    return report;
  } catch (const std::exception& e) {
    nlohmann::json partial = {{"complete", false}, {"error", e.what()}, {"seed", cfg.seed},
                              {"config", to_json(cfg)}};
    std::ofstream o(out_dir / files::kRunReport, std::ios::trunc);
    o << partial.dump(2) << '\n';
    throw;
  }
}

void write_plan(const ScenarioConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const auto plans = plan_regions(cfg);
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& plan : plans) {
    auto j = coverage::to_json(plan);
    const auto tree = net::build_binary_tree(plan.node_positions, plan.link_range_km());
    nlohmann::json parents = nlohmann::json::array();
    for (const auto& p : tree.parent) parents.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
    j["tree_parent"] = parents;
    j["tree_depth"] = tree.depth;
    regions.push_back(std::move(j));
  }
  const nlohmann::json out = {{"regions", regions},
                              {"remote_position", {cfg.remote_position.x_km, cfg.remote_position.y_km}},
                              {"backbone_range_km", cfg.backbone.range_km}};
  write_file(out_dir / files::kPlacement, [&](std::ostream& o) { o << out.dump(2) << '\n'; });
}

AnalyticsResult classify_export(const ScenarioConfig& cfg, const fs::path& db_csv, const fs::path& out_dir) {
  std::ifstream in(db_csv, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", db_csv.string()));
  const auto db = store::CentralDatabase::read_csv(in);
  for (RegionId id : db.regions()) cfg.region(id);  // UnknownRegion for records outside the config
  auto a = analyze(cfg, db);
  fs::create_directories(out_dir);
  write_analytics(a, out_dir);
  return a;
}

namespace {

void compare_text(const std::string& name, const std::string& expected, const std::string& actual) {
  if (expected == actual) return;
  std::istringstream a(expected);
  std::istringstream b(actual);
  std::string la;
  std::string lb;
  for (std::size_t line = 1;; ++line) {
    const bool ga = static_cast<bool>(std::getline(a, la));
    const bool gb = static_cast<bool>(std::getline(b, lb));
    if (!ga && !gb) break;
    if (ga != gb || la != lb) {
      throw ReplayMismatch(fmt::format("{} differs at line {}: stored '{}' vs replay '{}'", name, line,
                                       ga ? la : "<eof>", gb ? lb : "<eof>"));
    }
  }
  throw ReplayMismatch(fmt::format("{} differs in line endings", name));
}

std::string report_without_clock(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  j.erase("wall_clock_s");
  return j.dump(2);
}

}  // namespace

std::vector<std::string> replay(const fs::path& run_dir) {
  const auto stored_report = read_file(run_dir / files::kRunReport);
  const auto report = nlohmann::json::parse(stored_report);
  if (!report.value("complete", false)) throw ReplayMismatch("stored run is marked incomplete");
  const auto cfg = parse_config(report.at("config").dump(), (run_dir / files::kRunReport).string());
  const fs::path scratch = run_dir / ".replay";
  fs::remove_all(scratch);
  run_scenario(cfg, scratch);

  std::vector<std::string> compared;
  for (const char* name : {files::kPlacement, files::kTrace, files::kCentralDb, files::kDbSummary, files::kEnergy,
                           files::kEnergyPerNode, files::kPattern, files::kForecast, files::kMonthlyTemperature,
                           files::kMonthlyPrecipitation}) {
    if (!fs::exists(run_dir / name)) continue;
    if (!fs::exists(scratch / name)) throw ReplayMismatch(fmt::format("replay did not produce {}", name));
    compare_text(name, read_file(run_dir / name), read_file(scratch / name));
    compared.emplace_back(name);
  }
  compare_text(files::kRunReport, report_without_clock(stored_report),
               report_without_clock(read_file(scratch / files::kRunReport)));
  compared.emplace_back(files::kRunReport);
  fs::remove_all(scratch);
  return compared;
}

std::vector<RunReport> run_batch(const ScenarioConfig& cfg, unsigned runs, const fs::path& out_dir,
                                 unsigned threads) {
  std::vector<RunReport> reports(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<unsigned> next{0};
  const auto worker = [&] {
    for (unsigned i = next++; i < runs; i = next++) {
      ScenarioConfig c = cfg;
      c.seed = cfg.seed + i;
      try {
        reports[i] = run_scenario(c, out_dir / fmt::format("seed_{}", c.seed));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min(threads, runs));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

fs::path resolve_output_dir(const ScenarioConfig& cfg, const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("DROUGHTSIM_OUT"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

}  // namespace drought::scenario
