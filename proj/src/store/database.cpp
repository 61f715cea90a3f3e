#include "drought/store/database.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "drought/errors.hpp"

namespace drought::store {

namespace {

std::uint64_t pack(const RecordKey& k) {
  if (k.region > 0xFF || k.node > 0xFFFF || k.timestamp.seconds() >= (1ull << 40)) {
    throw ValidationError(fmt::format("record key out of range: region {}, node {}, t {}", k.region, k.node,
                                      k.timestamp.seconds()));
  }
  return (static_cast<std::uint64_t>(k.region) << 56) | (static_cast<std::uint64_t>(k.node) << 40) |
         k.timestamp.seconds();
}

bool earlier(const StoredRecord& a, const StoredRecord& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.node_id < b.node_id;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(fmt::format("line {}: bad number '{}'", line, text));
  }
  return value;
}

std::string csv_header() {
  std::string h = "timestamp,node_id,region_id";
  for (Field f : kAllFields) h += fmt::format(",raw_{}", field_name(f));
  for (Field f : kAllFields) h += fmt::format(",cal_{}", field_name(f));
  h += ",battery_mJ,frames_dropped,x_km,y_km,route_parent,hop_count";
  return h;
}

}  // namespace

double circular_mean_deg(const std::vector<double>& bearings) {
  double s = 0.0;
  double c = 0.0;
  for (double b : bearings) {
    const double r = b * std::numbers::pi / 180.0;
    s += std::sin(r);
    c += std::cos(r);
  }
  if (std::hypot(s, c) < 1e-12) return 0.0;
  double deg = std::atan2(s, c) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  // Snap round-off so {350, 10} gives 0 rather than 359.99999999999994.
  if (std::fabs(deg - std::round(deg)) < 1e-9) deg = std::round(deg);
  return deg >= 360.0 ? 0.0 : deg;
}

bool CentralDatabase::insert(const StoredRecord& record) {
  if (!keys_.insert(pack(record.key())).second) {
    ++duplicates_;
    return false;
  }
  const std::size_t index = records_.size();
  records_.push_back(record);
  auto& idx = by_region_[record.region_id];
  // Arrivals are nearly time ordered, so the insertion point is almost always the end.
  auto pos = idx.end();
  while (pos != idx.begin() && earlier(record, records_[*(pos - 1)])) --pos;
  idx.insert(pos, index);
  return true;
}

bool CentralDatabase::contains(const RecordKey& key) const { return keys_.count(pack(key)) != 0; }

std::vector<RegionId> CentralDatabase::regions() const {
  std::vector<RegionId> out;
  for (const auto& [r, idx] : by_region_) out.push_back(r);
  return out;
}

std::size_t CentralDatabase::region_count(RegionId region) const {
  const auto it = by_region_.find(region);
  return it == by_region_.end() ? 0 : it->second.size();
}

std::vector<const StoredRecord*> CentralDatabase::region_records(RegionId region) const {
  std::vector<const StoredRecord*> out;
  const auto it = by_region_.find(region);
  if (it == by_region_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t i : it->second) out.push_back(&records_[i]);
  return out;
}

std::optional<TimeWindow> CentralDatabase::span(RegionId region) const {
  const auto it = by_region_.find(region);
  if (it == by_region_.end() || it->second.empty()) return std::nullopt;
  return TimeWindow{records_[it->second.front()].timestamp, records_[it->second.back()].timestamp + 1};
}

std::vector<SeriesPoint> CentralDatabase::query_window(RegionId region, Field field, TimeWindow window) const {
  std::vector<SeriesPoint> out;
  const auto it = by_region_.find(region);
  if (it == by_region_.end() || window.end <= window.start) return out;
  const auto& idx = it->second;
  auto pos = std::lower_bound(idx.begin(), idx.end(), window.start,
                              [&](std::size_t i, SimTime t) { return records_[i].timestamp < t; });
  std::vector<double> values;
  auto flush = [&](SimTime t) {
    if (values.empty()) return;
    double v = 0.0;
    if (field == Field::WindDirection) {
      v = circular_mean_deg(values);
    } else {
      for (double x : values) v += x;
      v /= static_cast<double>(values.size());
    }
    out.push_back({t, v, values.size()});
    values.clear();
  };
  SimTime current = window.start;
  for (; pos != idx.end() && records_[*pos].timestamp < window.end; ++pos) {
    const StoredRecord& r = records_[*pos];
    if (r.timestamp != current) {
      flush(current);
      current = r.timestamp;
    }
    values.push_back(r.calibrated.values.get(field));
  }
  flush(current);
  return out;
}

void CentralDatabase::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  fmt::memory_buffer buf;
  for (const StoredRecord& r : records_) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{},{},{}", r.timestamp.seconds(), r.node_id, r.region_id);
    for (Field f : kAllFields) fmt::format_to(std::back_inserter(buf), ",{}", r.raw.values.get(f));
    for (Field f : kAllFields) fmt::format_to(std::back_inserter(buf), ",{}", r.calibrated.values.get(f));
    fmt::format_to(std::back_inserter(buf), ",{},{},{},{},", r.health.battery_mj, r.health.frames_dropped,
                   r.location.x_km, r.location.y_km);
    if (r.route_parent != kNoNode) fmt::format_to(std::back_inserter(buf), "{}", r.route_parent);
    fmt::format_to(std::back_inserter(buf), ",{}\n", r.hop_count);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

CentralDatabase CentralDatabase::read_csv(std::istream& in) {
  CentralDatabase db;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != csv_header()) {
    throw ParseError("line 1: not a central database export (header mismatch)");
  }
  constexpr std::size_t kColumns = 3 + 2 * kFieldCount + 6;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split(line);
    if (cols.size() != kColumns) {
      throw ParseError(fmt::format("line {}: expected {} columns, got {}", line_no, kColumns, cols.size()));
    }
    StoredRecord r;
    std::size_t c = 0;
    r.timestamp = SimTime(parse_number<std::uint64_t>(cols[c++], line_no));
    r.node_id = parse_number<NodeId>(cols[c++], line_no);
    r.region_id = parse_number<RegionId>(cols[c++], line_no);
    for (SensorReading* s : {&r.raw, &r.calibrated}) {
      s->node_id = r.node_id;
      s->region_id = r.region_id;
      s->timestamp = r.timestamp;
      for (Field f : kAllFields) s->values.set(f, parse_number<double>(cols[c++], line_no));
    }
    r.health.battery_mj = parse_number<double>(cols[c++], line_no);
    r.health.frames_dropped = parse_number<std::uint32_t>(cols[c++], line_no);
    r.location.x_km = parse_number<double>(cols[c++], line_no);
    r.location.y_km = parse_number<double>(cols[c++], line_no);
    r.route_parent = cols[c].empty() ? kNoNode : parse_number<NodeId>(cols[c], line_no);
    ++c;
    r.hop_count = static_cast<std::uint8_t>(parse_number<unsigned>(cols[c++], line_no));
    db.insert(r);
  }
  return db;
}

nlohmann::json CentralDatabase::summary() const {
  nlohmann::json regions = nlohmann::json::object();
  for (const auto& [r, idx] : by_region_) regions[std::to_string(r)] = idx.size();
  return {{"records", records_.size()}, {"per_region", regions}, {"duplicates", duplicates_}, {"losses", losses_}};
}

}  // namespace drought::store
