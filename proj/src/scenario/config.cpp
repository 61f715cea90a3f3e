#include "drought/scenario/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "drought/errors.hpp"

namespace drought::scenario {

namespace {

bool present(const YAML::Node& n) { return n && !n.IsNull(); }

// A YAML mapping being read: remembers which keys were consumed so leftovers
// can be reported as typos.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::string_view source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "expected a mapping");
  }

  bool has(const char* key) const { return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull(); }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    out = scalar<T>(node_[key], key);
  }

  Section sub(const char* key) {
    seen_.insert(key);
    return Section(has(key) ? node_[key] : YAML::Node(), qualified(key), source_);
  }

  YAML::Node raw(const char* key) {
    seen_.insert(key);
    return has(key) ? node_[key] : YAML::Node();
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (seen_.count(key) == 0) fail(kv.first, fmt::format("unknown key '{}'", qualified(key)));
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    const auto mark = at.Mark();
    throw ParseError(fmt::format("{}:{}:{}: {}", source_, mark.line + 1, mark.column + 1, what));
  }

  template <class T>
  T scalar(const YAML::Node& n, std::string_view key) const {
    if (!n.IsScalar()) fail(n, fmt::format("{} must be a scalar", qualified(key)));
    const std::string& text = n.Scalar();
    if constexpr (std::is_same_v<T, bool>) {
      if (text == "true") return true;
      if (text == "false") return false;
      fail(n, fmt::format("{} must be true or false, got '{}'", qualified(key), text));
    } else if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_arithmetic_v<T>) {
      T value{};
      const char* end = text.data() + text.size();
      const auto [ptr, ec] = std::from_chars(text.data(), end, value);
      if (ec != std::errc() || ptr != end) {
        fail(n, fmt::format("{} must be a {}, got '{}'", qualified(key),
                            std::is_integral_v<T> ? "non-negative integer" : "number", text));
      }
      return value;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config scalar");
    }
  }

  GeoPoint point(const char* key, GeoPoint fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto n = node_[key];
    if (!n.IsSequence() || n.size() != 2) fail(n, fmt::format("{} must be [x_km, y_km]", qualified(key)));
    return {scalar<double>(n[0], key), scalar<double>(n[1], key)};
  }

  std::string qualified(std::string_view key) const {
    return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::string_view source_;
  std::set<std::string, std::less<>> seen_;
};

void read_climatology(Section s, env::Climatology& c) {
  s.get("mean_temp_c", c.mean_temp_c);
  s.get("amplitude_c", c.amplitude_c);
  s.get("phase_rad", c.phase_rad);
  if (auto n = s.raw("monthly_precip_mm"); present(n)) {
    if (!n.IsSequence() || n.size() != 12) s.fail(n, "monthly_precip_mm must list 12 values");
    for (std::size_t m = 0; m < 12; ++m) c.monthly_precip_mm[m] = s.scalar<double>(n[m], "monthly_precip_mm");
  }
  s.get("humidity_pct", c.humidity_pct);
  s.get("pressure_hpa", c.pressure_hpa);
  s.get("wind_dir_deg", c.wind_dir_deg);
  s.get("wind_speed_ms", c.wind_speed_ms);
  s.get("groundwater_m", c.groundwater_m);
  s.finish();
}

void read_drought(Section s, env::DroughtScenario& d) {
  s.get("temperature_anomaly_c", d.temperature_anomaly_c);
  s.get("precipitation_scale", d.precipitation_scale);
  std::uint64_t start = d.active_start.seconds();
  std::uint64_t end = d.active_end.seconds();
  s.get("active_start_s", start);
  s.get("active_end_s", end);
  d.active_start = SimTime(start);
  d.active_end = SimTime(end);
  if (s.has("wind")) {
    Section w = s.sub("wind");
    env::Wind wind = d.advection_wind.value_or(env::Wind{});
    w.get("direction_deg", wind.direction_deg);
    w.get("speed_ms", wind.speed_ms);
    w.finish();
    d.advection_wind = wind;
  } else {
    s.raw("wind");
  }
  s.finish();
}

void read_weather(Section s, env::WeatherParams& w) {
  s.get("ar_rho", w.ar_rho);
  s.get("ar_sigma_c", w.ar_sigma_c);
  s.get("reference_step_s", w.reference_step_s);
  s.get("max_step_c", w.max_step_c);
  s.get("noise_cap_c", w.noise_cap_c);
  s.get("gradient_x_c_per_km", w.gradient_x_c_per_km);
  s.get("gradient_y_c_per_km", w.gradient_y_c_per_km);
  s.get("anomaly_ramp_s", w.anomaly_ramp_s);
  s.get("rain_events_per_month", w.rain_events_per_month);
  s.get("precip_jitter", w.precip_jitter);
  s.get("humidity_sd_pct", w.humidity_sd_pct);
  s.get("pressure_sd_hpa", w.pressure_sd_hpa);
  s.get("wind_dir_sd_deg", w.wind_dir_sd_deg);
  s.get("wind_speed_sd_ms", w.wind_speed_sd_ms);
  s.get("groundwater_sd_m", w.groundwater_sd_m);
  s.get("groundwater_drawdown_m_per_year", w.groundwater_drawdown_m_per_year);
  s.finish();
}

net::AttributeMask read_attributes(Section& s, const char* key, net::AttributeMask fallback) {
  auto n = s.raw(key);
  if (!present(n)) return fallback;
  if (!n.IsSequence() || n.size() == 0) s.fail(n, fmt::format("{} must be a non-empty list of fields", key));
  net::AttributeMask mask = 0;
  for (const auto& item : n) {
    const auto name = s.scalar<std::string>(item, key);
    const auto f = parse_field(name);
    if (!f) s.fail(item, fmt::format("unknown field '{}' in {}", name, key));
    mask |= net::attribute_bit(*f);
  }
  return mask;
}

void read_affine(Section s, store::FieldMaps& maps) {
  for (Field f : kAllFields) {
    const std::string name(field_name(f));
    if (!s.has(name.c_str())) {
      s.raw(name.c_str());
      continue;
    }
    Section m = s.sub(name.c_str());
    auto& a = maps[static_cast<std::size_t>(f)];
    m.get("gain", a.gain);
    m.get("offset", a.offset);
    m.finish();
  }
  s.finish();
}

RegionConfig read_region(Section s, const std::map<RegionId, RegionConfig>& defaults) {
  RegionId id = 0;
  if (!s.has("id")) s.fail(s.node(), "every region needs an id");
  s.get("id", id);
  RegionConfig r;
  const auto def = defaults.find(id);
  if (def != defaults.end()) {
    r = def->second;
  } else if (!s.has("anchor")) {
    s.fail(s.node(), fmt::format("region {} is not one of the default five and needs an anchor", id));
  }
  r.id = id;
  r.anchor = s.point("anchor", r.anchor);
  s.get("side_km", r.side_km);
  read_climatology(s.sub("climatology"), r.climatology);
  read_drought(s.sub("drought"), r.drought);
  s.finish();
  return r;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open config file {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig cfg;
  const auto anchors = coverage::default_region_anchors();
  const auto drought = env::canonical_scenario(anchors);
  for (const auto& [id, anchor] : anchors) {
    RegionConfig r;
    r.id = id;
    r.anchor = anchor;
    if (const auto it = drought.find(id); it != drought.end()) r.drought = it->second;
    cfg.regions.push_back(r);
  }
  return cfg;
}

ScenarioConfig parse_config(std::string_view text, std::string_view source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(fmt::format("{}:{}:{}: {}", source_name, e.mark.line + 1, e.mark.column + 1, e.msg));
  }

  ScenarioConfig cfg = default_config();
  Section s(root, "", source_name);
  s.get("seed", cfg.seed);
  s.get("horizon_s", cfg.horizon_s);
  s.get("reporting_period_s", cfg.reporting_period_s);
  s.get("active_window_s", cfg.active_window_s);
  s.get("allow_short_period", cfg.allow_short_period);
  s.get("output_dir", cfg.output_dir);
  s.get("trace", cfg.trace);
  s.get("initial_battery_mj", cfg.initial_battery_mj);

  if (s.has("routing")) {
    const auto name = s.scalar<std::string>(root["routing"], "routing");
    const auto mode = net::parse_routing(name);
    if (!mode) s.fail(root["routing"], fmt::format("routing must be tree, diffusion, combined or flooding, got '{}'", name));
    cfg.routing = *mode;
  }
  s.raw("routing");

  {
    Section p = s.sub("placement");
    if (p.has("cell_shape")) {
      const auto name = p.scalar<std::string>(p.node()["cell_shape"], "cell_shape");
      const auto shape = coverage::parse_shape(name);
      if (!shape) p.fail(p.node()["cell_shape"], fmt::format("unknown cell_shape '{}'", name));
      cfg.cell_shape = *shape;
    }
    p.raw("cell_shape");
    p.get("radio_range_km", cfg.radio_range_km);
    p.get("nodes_per_region", cfg.nodes_per_region);
    p.finish();
  }
  {
    Section l = s.sub("link");
    l.get("delay_s", cfg.link.delay_s);
    l.get("loss_prob", cfg.link.loss_prob);
    l.finish();
  }
  {
    Section m = s.sub("mac");
    m.get("max_frame_bytes", cfg.mac.max_frame_bytes);
    m.get("queue_capacity", cfg.mac.queue_capacity);
    m.get("backoff_slots", cfg.mac.backoff_slots);
    m.get("slot_s", cfg.mac.slot_s);
    m.get("airtime_s", cfg.mac.airtime_s);
    m.finish();
  }
  {
    Section e = s.sub("energy");
    e.get("e_elec_nj_per_bit", cfg.energy.e_elec_nj_per_bit);
    e.get("e_amp_pj_per_bit_km2", cfg.energy.e_amp_pj_per_bit_km2);
    e.get("e_sense_uj", cfg.energy.e_sense_uj);
    e.get("p_idle_uw", cfg.energy.p_idle_uw);
    e.finish();
  }
  {
    Section d = s.sub("diffusion");
    unsigned hop_limit = cfg.diffusion.interest_hop_limit;
    unsigned data_rate = cfg.diffusion.data_rate;
    unsigned flood_hops = cfg.stack.flood_hop_limit;
    d.get("interest_hop_limit", hop_limit);
    d.get("data_rate", data_rate);
    d.get("duration_s", cfg.diffusion.duration_s);
    d.get("flood_hop_limit", flood_hops);
    d.get("data_cache_capacity", cfg.stack.data_cache_capacity);
    if (hop_limit > 255 || flood_hops > 255 || data_rate > 65535) d.fail(d.node(), "diffusion limit out of range");
    cfg.diffusion.interest_hop_limit = static_cast<std::uint8_t>(hop_limit);
    cfg.diffusion.data_rate = static_cast<std::uint16_t>(data_rate);
    cfg.stack.flood_hop_limit = static_cast<std::uint8_t>(flood_hops);
    cfg.diffusion.attributes = read_attributes(d, "attributes", cfg.diffusion.attributes);
    cfg.diffusion.query_attributes = read_attributes(d, "query_attributes", cfg.diffusion.query_attributes);
    d.finish();
  }
  read_weather(s.sub("weather"), cfg.weather);
  {
    Section b = s.sub("backbone");
    b.get("range_km", cfg.backbone.range_km);
    b.get("latency_s", cfg.backbone.latency_s);
    b.get("loss_prob", cfg.backbone.loss_prob);
    b.get("max_retries", cfg.backbone.max_retries);
    b.get("retransmit_timeout_s", cfg.backbone.retransmit_timeout_s);
    b.get("local_capacity", cfg.backbone.local_capacity);
    cfg.remote_position = b.point("remote_position", cfg.remote_position);
    b.finish();
  }
  {
    Section c = s.sub("calibration");
    read_affine(c.sub("fields"), cfg.calibration.fields);
    if (auto nodes = c.raw("per_node"); present(nodes)) {
      if (!nodes.IsMap()) c.fail(nodes, "calibration.per_node must map node ids to field maps");
      for (const auto& kv : nodes) {
        const auto node = c.scalar<NodeId>(kv.first, "per_node");
        store::FieldMaps maps{};
        read_affine(Section(kv.second, c.qualified(fmt::format("per_node.{}", node)), source_name), maps);
        cfg.calibration.per_node[node] = maps;
      }
    }
    c.finish();
  }
  {
    Section a = s.sub("analytics");
    a.get("window_days", cfg.window_days);
    Section t = a.sub("thresholds");
    t.get("precip_serious_mm", cfg.thresholds.precip_serious_mm);
    t.get("anomaly_serious_c", cfg.thresholds.anomaly_serious_c);
    t.get("precip_moderate_mm", cfg.thresholds.precip_moderate_mm);
    t.get("anomaly_moderate_c", cfg.thresholds.anomaly_moderate_c);
    t.get("precip_slight_mm", cfg.thresholds.precip_slight_mm);
    t.get("anomaly_slight_c", cfg.thresholds.anomaly_slight_c);
    t.finish();
    a.finish();
  }
  if (auto regions = s.raw("regions"); present(regions)) {
    if (!regions.IsSequence() || regions.size() == 0) s.fail(regions, "regions must be a non-empty list");
    std::map<RegionId, RegionConfig> defaults;
    for (const auto& r : cfg.regions) defaults[r.id] = r;
    cfg.regions.clear();
    for (std::size_t i = 0; i < regions.size(); ++i) {
      cfg.regions.push_back(read_region(Section(regions[i], fmt::format("regions[{}]", i), source_name), defaults));
    }
  }
  s.finish();

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.string());
}

void ScenarioConfig::validate() const {
  if (horizon_s == 0) throw ValidationError("horizon_s must be > 0");
  if (reporting_period_s == 0) throw ValidationError("reporting_period_s must be > 0");
  if (reporting_period_s < 1800 && !allow_short_period) {
    throw ValidationError(fmt::format(
        "reporting_period_s = {} is below the 1800 s floor; set allow_short_period: true to override",
        reporting_period_s));
  }
  if (active_window_s == 0 || active_window_s > reporting_period_s) {
    throw ValidationError("active_window_s must be in (0, reporting_period_s]");
  }
  if (cell_shape == coverage::CellShape::Circle) {
    throw ValidationError("placement.cell_shape circle leaves gaps and cannot be tiled; use hexagon, square or triangle");
  }
  if (!(radio_range_km > 0.0)) throw ValidationError("placement.radio_range_km must be > 0");
  if (nodes_per_region == 1) throw ValidationError("placement.nodes_per_region must be 0 (auto) or >= 2");
  if (regions.empty()) throw ValidationError("at least one region is required");
  std::set<RegionId> ids;
  for (const auto& r : regions) {
    if (r.id == 0) throw ValidationError("region ids start at 1");
    if (!ids.insert(r.id).second) throw ValidationError(fmt::format("region {} is listed twice", r.id));
    if (!(r.side_km > 0.0)) throw ValidationError(fmt::format("region {} side_km must be > 0", r.id));
    r.climatology.validate();
    r.drought.validate();
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (coverage::region_square(regions[i].anchor, regions[i].side_km)
              .overlaps(coverage::region_square(regions[j].anchor, regions[j].side_km))) {
        throw ValidationError(fmt::format("regions {} and {} overlap", regions[i].id, regions[j].id));
      }
    }
  }
  if (window_days < 30) throw ValidationError("analytics.window_days must be >= 30");
  weather.validate();
  network_config().validate();
  backbone.validate();
  thresholds.validate();
}

net::NetworkConfig ScenarioConfig::network_config() const {
  net::NetworkConfig n;
  n.routing = routing;
  n.link = link;
  n.mac = mac;
  n.duty = {reporting_period_s, active_window_s};
  n.energy = energy;
  n.diffusion = diffusion;
  n.stack = stack;
  n.initial_battery_mj = initial_battery_mj;
  n.seed = seed;
  n.horizon = SimTime(horizon_s);
  return n;
}

std::map<RegionId, GeoPoint> ScenarioConfig::anchors() const {
  std::map<RegionId, GeoPoint> out;
  for (const auto& r : regions) out[r.id] = r.anchor;
  return out;
}

const RegionConfig& ScenarioConfig::region(RegionId id) const {
  for (const auto& r : regions) {
    if (r.id == id) return r;
  }
  throw UnknownRegion(fmt::format("region {} is not configured", id));
}

namespace {

nlohmann::json attributes_json(net::AttributeMask mask) {
  nlohmann::json out = nlohmann::json::array();
  for (Field f : kAllFields) {
    if (mask & net::attribute_bit(f)) out.push_back(field_name(f));
  }
  return out;
}

nlohmann::json affine_json(const store::FieldMaps& maps) {
  nlohmann::json out = nlohmann::json::object();
  for (Field f : kAllFields) {
    const auto& a = maps[static_cast<std::size_t>(f)];
    out[std::string(field_name(f))] = {{"gain", a.gain}, {"offset", a.offset}};
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const ScenarioConfig& cfg) {
  using nlohmann::json;
  json regions = json::array();
  for (const auto& r : cfg.regions) {
    const auto& c = r.climatology;
    const auto& d = r.drought;
    json drought = {{"temperature_anomaly_c", d.temperature_anomaly_c},
                    {"precipitation_scale", d.precipitation_scale},
                    {"active_start_s", d.active_start.seconds()},
                    {"active_end_s", d.active_end.seconds()}};
    if (d.advection_wind) {
      drought["wind"] = {{"direction_deg", d.advection_wind->direction_deg},
                         {"speed_ms", d.advection_wind->speed_ms}};
    }
    regions.push_back({{"id", r.id},
                       {"anchor", {r.anchor.x_km, r.anchor.y_km}},
                       {"side_km", r.side_km},
                       {"climatology",
                        {{"mean_temp_c", c.mean_temp_c},
                         {"amplitude_c", c.amplitude_c},
                         {"phase_rad", c.phase_rad},
                         {"monthly_precip_mm", c.monthly_precip_mm},
                         {"humidity_pct", c.humidity_pct},
                         {"pressure_hpa", c.pressure_hpa},
                         {"wind_dir_deg", c.wind_dir_deg},
                         {"wind_speed_ms", c.wind_speed_ms},
                         {"groundwater_m", c.groundwater_m}}},
                       {"drought", drought}});
  }
  json per_node = json::object();
  for (const auto& [node, maps] : cfg.calibration.per_node) per_node[std::to_string(node)] = affine_json(maps);
  const auto& w = cfg.weather;
  const auto& t = cfg.thresholds;
  return {
      {"seed", cfg.seed},
      {"horizon_s", cfg.horizon_s},
      {"reporting_period_s", cfg.reporting_period_s},
      {"active_window_s", cfg.active_window_s},
      {"allow_short_period", cfg.allow_short_period},
      {"routing", net::routing_name(cfg.routing)},
      {"placement",
       {{"cell_shape", coverage::shape_name(cfg.cell_shape)},
        {"radio_range_km", cfg.radio_range_km},
        {"nodes_per_region", cfg.nodes_per_region}}},
      {"link", {{"delay_s", cfg.link.delay_s}, {"loss_prob", cfg.link.loss_prob}}},
      {"mac",
       {{"max_frame_bytes", cfg.mac.max_frame_bytes},
        {"queue_capacity", cfg.mac.queue_capacity},
        {"backoff_slots", cfg.mac.backoff_slots},
        {"slot_s", cfg.mac.slot_s},
        {"airtime_s", cfg.mac.airtime_s}}},
      {"energy",
       {{"e_elec_nj_per_bit", cfg.energy.e_elec_nj_per_bit},
        {"e_amp_pj_per_bit_km2", cfg.energy.e_amp_pj_per_bit_km2},
        {"e_sense_uj", cfg.energy.e_sense_uj},
        {"p_idle_uw", cfg.energy.p_idle_uw}}},
      {"initial_battery_mj", cfg.initial_battery_mj},
      {"diffusion",
       {{"interest_hop_limit", cfg.diffusion.interest_hop_limit},
        {"data_rate", cfg.diffusion.data_rate},
        {"duration_s", cfg.diffusion.duration_s},
        {"flood_hop_limit", cfg.stack.flood_hop_limit},
        {"data_cache_capacity", cfg.stack.data_cache_capacity},
        {"attributes", attributes_json(cfg.diffusion.attributes)},
        {"query_attributes", attributes_json(cfg.diffusion.query_attributes)}}},
      {"weather",
       {{"ar_rho", w.ar_rho},
        {"ar_sigma_c", w.ar_sigma_c},
        {"reference_step_s", w.reference_step_s},
        {"max_step_c", w.max_step_c},
        {"noise_cap_c", w.noise_cap_c},
        {"gradient_x_c_per_km", w.gradient_x_c_per_km},
        {"gradient_y_c_per_km", w.gradient_y_c_per_km},
        {"anomaly_ramp_s", w.anomaly_ramp_s},
        {"rain_events_per_month", w.rain_events_per_month},
        {"precip_jitter", w.precip_jitter},
        {"humidity_sd_pct", w.humidity_sd_pct},
        {"pressure_sd_hpa", w.pressure_sd_hpa},
        {"wind_dir_sd_deg", w.wind_dir_sd_deg},
        {"wind_speed_sd_ms", w.wind_speed_sd_ms},
        {"groundwater_sd_m", w.groundwater_sd_m},
        {"groundwater_drawdown_m_per_year", w.groundwater_drawdown_m_per_year}}},
      {"backbone",
       {{"range_km", cfg.backbone.range_km},
        {"latency_s", cfg.backbone.latency_s},
        {"loss_prob", cfg.backbone.loss_prob},
        {"max_retries", cfg.backbone.max_retries},
        {"retransmit_timeout_s", cfg.backbone.retransmit_timeout_s},
        {"local_capacity", cfg.backbone.local_capacity},
        {"remote_position", {cfg.remote_position.x_km, cfg.remote_position.y_km}}}},
      {"calibration", {{"fields", affine_json(cfg.calibration.fields)}, {"per_node", per_node}}},
      {"analytics",
       {{"window_days", cfg.window_days},
        {"thresholds",
         {{"precip_serious_mm", t.precip_serious_mm},
          {"anomaly_serious_c", t.anomaly_serious_c},
          {"precip_moderate_mm", t.precip_moderate_mm},
          {"anomaly_moderate_c", t.anomaly_moderate_c},
          {"precip_slight_mm", t.precip_slight_mm},
          {"anomaly_slight_c", t.anomaly_slight_c}}}}},
      {"regions", regions},
      {"trace", cfg.trace},
  };
}

}  // namespace drought::scenario
