#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "drought/errors.hpp"
#include "drought/scenario/run.hpp"

using namespace drought;
using namespace drought::scenario;

namespace {

struct Options {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> routing;
  bool trace = false;
  unsigned runs = 1;
  unsigned threads = 0;
};

ScenarioConfig load(const Options& o) {
  ScenarioConfig cfg = o.config ? load_config(*o.config) : parse_config("", "<defaults>");
  if (o.seed) cfg.seed = *o.seed;
  if (o.routing) {
    const auto mode = net::parse_routing(*o.routing);
    if (!mode) throw ValidationError(fmt::format("--routing must be tree, diffusion, combined or flooding"));
    cfg.routing = *mode;
  }
  if (o.trace) cfg.trace = true;
  cfg.validate();
  return cfg;
}

void print_summary(const RunReport& r, const std::filesystem::path& out) {
  fmt::print("seed {}  routing {}  events {}  wall {:.2f} s\n", r.config.seed, net::routing_name(r.config.routing),
             r.events_processed, r.wall_clock_s);
  fmt::print("records {}  losses {}  duplicates {}\n", r.central_records, r.central_losses, r.central_duplicates);
  for (const auto& [id, f] : r.forecasts) {
    fmt::print("  region {}: {} -> forecast {}\n", id, analytics::severity_name(f.current),
               analytics::severity_name(f.forecast));
  }
  for (const auto& n : r.notes) fmt::print("  note: {}\n", n);
  fmt::print("outputs in {}\n", out.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drought-monitoring sensor network simulator"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Scenario YAML file (defaults when omitted)");
    sub->add_option("--seed", o.seed, "Override the configured seed");
    sub->add_option("--out", o.out, "Output directory (beats $DROUGHTSIM_OUT and the config)");
    sub->add_option("--routing", o.routing, "tree | diffusion | combined | flooding");
  };

  auto* plan = app.add_subcommand("plan", "Place nodes and build routing trees only");
  common(plan);
  auto* run = app.add_subcommand("run", "Simulate, store and classify");
  common(run);
  run->add_flag("--trace", o.trace, "Write the kernel event trace (large)");
  run->add_option("--runs", o.runs, "Independent runs with seeds seed..seed+N-1")->check(CLI::PositiveNumber);
  run->add_option("--threads", o.threads, "Parallel runs at most (default: hardware threads)");

  std::string db_path;
  auto* classify = app.add_subcommand("classify", "Re-run analytics on an exported central_db.csv");
  common(classify);
  classify->add_option("--db", db_path, "central_db.csv to classify")->required();

  std::string replay_dir;
  auto* rep = app.add_subcommand("replay", "Re-run a stored run and compare its outputs byte for byte");
  rep->add_option("dir", replay_dir, "Directory holding run_report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (rep->parsed()) {
      const auto files = replay(replay_dir);
      fmt::print("replay ok: {} files identical\n", files.size());
      return 0;
    }
    const ScenarioConfig cfg = load(o);
    const auto out = resolve_output_dir(cfg, o.out);
    if (plan->parsed()) {
      write_plan(cfg, out);
      fmt::print("placement written to {}\n", (out / files::kPlacement).string());
    } else if (classify->parsed()) {
      const auto a = classify_export(cfg, db_path, out);
      for (const auto& [id, f] : a.forecasts) {
        fmt::print("region {}: {} -> forecast {}\n", id, analytics::severity_name(f.current),
                   analytics::severity_name(f.forecast));
      }
      for (const auto& n : a.notes) fmt::print("note: {}\n", n);
    } else if (o.runs > 1) {
      const unsigned threads = o.threads != 0 ? o.threads : std::max(1u, std::thread::hardware_concurrency());
      for (const auto& r : run_batch(cfg, o.runs, out, threads)) {
        print_summary(r, out / fmt::format("seed_{}", r.config.seed));
      }
    } else {
      print_summary(run_scenario(cfg, out), out);
    }
  } catch (const ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "invalid configuration: {}\n", e.what());
    return 2;
  } catch (const ReplayMismatch& e) {
    fmt::print(stderr, "replay mismatch: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
