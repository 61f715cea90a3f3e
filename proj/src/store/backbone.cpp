#include "drought/store/backbone.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include <fmt/format.h>

#include "drought/errors.hpp"

namespace drought::store {

namespace {

constexpr RegionId kRemote = 0;

std::uint64_t packed(const RecordKey& k) {
  return (static_cast<std::uint64_t>(k.region) << 56) ^ (static_cast<std::uint64_t>(k.node) << 40) ^
         k.timestamp.seconds();
}

}  // namespace

LinkBudget backbone_link_budget(GeoPoint a, GeoPoint b, double range_km) {
  const double d = distance_km(a, b);
  return {d <= range_km, d};
}

void BackboneParams::validate() const {
  if (!(range_km > 0.0)) throw ValidationError("backbone range_km must be > 0");
  if (!(loss_prob >= 0.0 && loss_prob < 1.0)) throw ValidationError("backbone loss_prob must be in [0,1)");
  if (retransmit_timeout_s == 0) throw ValidationError("backbone retransmit_timeout_s must be > 0");
  if (local_capacity == 0) throw ValidationError("local database capacity must be > 0");
}

std::map<RegionId, std::vector<RegionId>> backbone_routes(const std::vector<StationSite>& stations,
                                                          GeoPoint remote, double range_km) {
  // BFS outward from the remote station; ties resolve to the lower region id.
  std::vector<StationSite> sorted = stations;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.region < b.region; });
  std::map<RegionId, RegionId> next_hop;
  std::deque<std::pair<RegionId, GeoPoint>> frontier{{kRemote, remote}};
  while (!frontier.empty()) {
    const auto [at, pos] = frontier.front();
    frontier.pop_front();
    for (const auto& s : sorted) {
      if (next_hop.count(s.region) != 0) continue;
      if (!backbone_link_budget(s.position, pos, range_km).in_range) continue;
      next_hop[s.region] = at;
      frontier.emplace_back(s.region, s.position);
    }
  }
  std::map<RegionId, std::vector<RegionId>> routes;
  for (const auto& s : sorted) {
    if (next_hop.count(s.region) == 0) {
      throw ValidationError(fmt::format("base station {} cannot reach the remote station within {} km hops",
                                        s.region, range_km));
    }
    std::vector<RegionId> path;
    for (RegionId cur = next_hop[s.region];; cur = next_hop[cur]) {
      path.push_back(cur);
      if (cur == kRemote) break;
    }
    routes[s.region] = std::move(path);
  }
  return routes;
}

Backbone::Backbone(Kernel& kernel, CentralDatabase& central, BackboneParams params, Calibration calibration,
                   std::vector<StationSite> stations, GeoPoint remote_position,
                   std::map<NodeId, GeoPoint> node_locations, std::uint64_t seed)
    : kernel_(kernel),
      central_(central),
      params_(params),
      calibration_(std::move(calibration)),
      node_locations_(std::move(node_locations)) {
  params_.validate();
  auto routes = backbone_routes(stations, remote_position, params_.range_km);
  for (const auto& s : stations) {
    Local l;
    l.site = s;
    l.route = routes.at(s.region);
    l.rng = sim::RngStream(seed, fmt::format("lbs:{}", s.region));
    locals_.emplace(s.region, std::move(l));
    kernel_.add_entity(sim::local_base_station(s.region),
                       [this, r = s.region](const Delivery& d) { on_local(r, d); });
  }
  kernel_.add_entity(sim::remote_base_station(), [this](const Delivery& d) { on_remote(d); });
}

sim::EntityId Backbone::hop_entity(RegionId hop) const {
  return hop == kRemote ? sim::remote_base_station() : sim::local_base_station(hop);
}

StoredRecord Backbone::make_record(RegionId region, const net::DataMessage& msg, NodeId last_hop) const {
  StoredRecord r;
  r.timestamp = msg.reading.timestamp;
  r.node_id = msg.source;
  r.region_id = region;
  r.raw = msg.reading;
  r.raw.node_id = msg.source;
  r.raw.region_id = region;
  r.calibrated = calibration_.apply(r.raw);
  r.health = msg.health;
  const auto loc = node_locations_.find(msg.source);
  if (loc != node_locations_.end()) r.location = loc->second;
  r.route_parent = msg.route_hint != kNoNode ? msg.route_hint : last_hop;
  r.hop_count = msg.hop_count;
  return r;
}

void Backbone::on_local(RegionId region, const Delivery& d) {
  Local& l = locals_.at(region);
  if (const auto* h = std::get_if<SinkHandoff>(&d.payload)) {
    ingest(l, *h);
  } else if (const auto* seg = std::get_if<UplinkSegment>(&d.payload)) {
    forward(region, *seg);
  } else if (const auto* ack = std::get_if<UplinkAck>(&d.payload)) {
    acknowledge(l, ack->seq);
  } else if (const auto* t = std::get_if<RetransmitTimer>(&d.payload)) {
    on_timer(l, t->seq);
  } else {
    throw Error(fmt::format("local base station {} got an unexpected {} event", region, payload_tag(d.payload)));
  }
}

void Backbone::ingest(Local& l, const SinkHandoff& h) {
  const StoredRecord record = make_record(l.site.region, h.msg, h.last_hop);
  if (!l.seen.insert(packed(record.key())).second) {
    ++l.counters.duplicates;
    return;
  }
  ++l.counters.ingested;
  const std::uint64_t seq = (static_cast<std::uint64_t>(l.site.region) << 40) | l.next_seq++;
  store_locally(l, record);
  l.db.back().seq = seq;
  l.pending.emplace(seq, Pending{record, 0});
  transmit(l, seq);
}

void Backbone::store_locally(Local& l, const StoredRecord& r) {
  if (l.db.size() >= params_.local_capacity) {
    const auto acked = std::find_if(l.db.begin(), l.db.end(), [&](const LocalEntry& e) {
      return l.pending.count(e.seq) == 0 && l.abandoned.count(e.seq) == 0;
    });
    if (acked != l.db.end()) {
      l.db.erase(acked);
      ++l.counters.evicted;
    } else {
      ++l.counters.capacity_overruns;
    }
  }
  l.db.push_back({r.key(), 0});
}

void Backbone::transmit(Local& l, std::uint64_t seq) {
  Pending& p = l.pending.at(seq);
  ++p.attempts;
  ++l.counters.transmissions;
  if (p.attempts > 1) ++l.counters.retransmissions;
  const auto self = sim::local_base_station(l.site.region);
  if (l.rng.bernoulli(params_.loss_prob)) {
    ++l.counters.segments_lost;
  } else {
    kernel_.send_delayed(self, hop_entity(l.route.front()), UplinkSegment{seq, l.site.region, 0, p.record},
                         params_.latency_s);
  }
  kernel_.schedule(kernel_.now() + params_.retransmit_timeout_s, self, RetransmitTimer{seq});
}

void Backbone::forward(RegionId at, const UplinkSegment& seg) {
  Local& relay = locals_.at(at);
  const auto& route = locals_.at(seg.origin).route;
  const std::uint8_t next = static_cast<std::uint8_t>(seg.hop + 1);
  if (next >= route.size()) throw Error("uplink segment ran past the end of its route");
  if (relay.rng.bernoulli(params_.loss_prob)) {
    ++relay.counters.segments_lost;
    return;
  }
  UplinkSegment fwd = seg;
  fwd.hop = next;
  kernel_.send_delayed(sim::local_base_station(at), hop_entity(route[next]), std::move(fwd), params_.latency_s);
}

void Backbone::on_remote(const Delivery& d) {
  const auto* seg = std::get_if<UplinkSegment>(&d.payload);
  if (seg == nullptr) {
    throw Error(fmt::format("remote base station got an unexpected {} event", payload_tag(d.payload)));
  }
  if (remote_seen_.insert(seg->seq).second) central_.insert(seg->record);
  const Local& origin = locals_.at(seg->origin);
  kernel_.send_delayed(sim::remote_base_station(), sim::local_base_station(seg->origin), UplinkAck{seg->seq},
                       params_.latency_s * origin.route.size());
}

void Backbone::acknowledge(Local& l, std::uint64_t seq) { l.pending.erase(seq); }

void Backbone::on_timer(Local& l, std::uint64_t seq) {
  const auto it = l.pending.find(seq);
  if (it == l.pending.end()) return;
  if (it->second.attempts > params_.max_retries) {
    // DeliveryAbandoned: the record stays in the local database and is
    // counted as a loss at the central side.
    ++l.counters.abandoned;
    abandoned_.push_back(it->second.record.key());
    central_.record_losses(1);
    l.abandoned.insert(seq);
    l.pending.erase(it);
    return;
  }
  transmit(l, seq);
}

LocalCounters Backbone::totals() const {
  LocalCounters t;
  for (const auto& [r, l] : locals_) {
    const auto& c = l.counters;
    t.ingested += c.ingested;
    t.duplicates += c.duplicates;
    t.evicted += c.evicted;
    t.capacity_overruns += c.capacity_overruns;
    t.transmissions += c.transmissions;
    t.retransmissions += c.retransmissions;
    t.segments_lost += c.segments_lost;
    t.abandoned += c.abandoned;
    t.evicted_unacked += c.evicted_unacked;
  }
  return t;
}

std::size_t Backbone::in_flight() const {
  std::size_t n = 0;
  for (const auto& [r, l] : locals_) n += l.pending.size();
  return n;
}

}  // namespace drought::store
