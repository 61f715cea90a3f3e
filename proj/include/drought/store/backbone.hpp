#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>
#include <vector>

#include "drought/events.hpp"
#include "drought/sim/rng.hpp"
#include "drought/store/calibration.hpp"
#include "drought/store/database.hpp"

namespace drought::store {

struct LinkBudget {
  bool in_range = false;
  double distance_km = 0.0;
};

LinkBudget backbone_link_budget(GeoPoint a, GeoPoint b, double range_km = 120.0);

struct BackboneParams {
  double range_km = 120.0;
  Seconds latency_s = 1;  // per backbone hop; the clock has whole-second resolution
  double loss_prob = 0.0;  // per segment per hop; acks are lossless
  unsigned max_retries = 8;
  Seconds retransmit_timeout_s = 5;
  std::size_t local_capacity = 10'000;

  void validate() const;
};

struct StationSite {
  RegionId region = 0;
  GeoPoint position;
};

// Fewest-hop station path from each local base station to the remote one
// (the last element is 0, meaning the remote station). Throws
// ValidationError when a station cannot reach the remote one at all.
std::map<RegionId, std::vector<RegionId>> backbone_routes(const std::vector<StationSite>& stations,
                                                          GeoPoint remote, double range_km);

struct LocalCounters {
  std::uint64_t ingested = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t evicted = 0;
  std::uint64_t capacity_overruns = 0;  // stored past capacity because nothing was acknowledged yet
  std::uint64_t transmissions = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t segments_lost = 0;
  std::uint64_t abandoned = 0;
  std::uint64_t evicted_unacked = 0;  // must stay 0
};

// Tier 2 and tier 3: one local base station per region, each with a bounded
// local database and a reliable uplink, plus the remote station that owns the
// central database.
class Backbone {
 public:
  Backbone(Kernel& kernel, CentralDatabase& central, BackboneParams params, Calibration calibration,
           std::vector<StationSite> stations, GeoPoint remote_position, std::map<NodeId, GeoPoint> node_locations,
           std::uint64_t seed);

  const LocalCounters& counters(RegionId region) const { return locals_.at(region).counters; }
  LocalCounters totals() const;
  std::size_t local_size(RegionId region) const { return locals_.at(region).db.size(); }
  std::size_t in_flight() const;
  const std::vector<RegionId>& route(RegionId region) const { return locals_.at(region).route; }
  std::vector<RecordKey> abandoned() const { return abandoned_; }

  // Build the record a local station would store for `msg` (no side effects).
  StoredRecord make_record(RegionId region, const net::DataMessage& msg, NodeId last_hop) const;

 private:
  struct Pending {
    StoredRecord record;
    unsigned attempts = 0;
  };
  struct LocalEntry {
    RecordKey key;
    std::uint64_t seq = 0;
  };
  struct Local {
    StationSite site;
    std::vector<RegionId> route;
    sim::RngStream rng;
    std::deque<LocalEntry> db;
    std::unordered_set<std::uint64_t> seen;
    std::map<std::uint64_t, Pending> pending;  // by transport seq, awaiting an ack
    std::set<std::uint64_t> abandoned;
    std::uint64_t next_seq = 0;
    LocalCounters counters;
  };

  void on_local(RegionId region, const Delivery& d);
  void on_remote(const Delivery& d);
  void ingest(Local& l, const SinkHandoff& h);
  void store_locally(Local& l, const StoredRecord& r);
  void transmit(Local& l, std::uint64_t seq);
  void forward(RegionId at, const UplinkSegment& seg);
  void acknowledge(Local& l, std::uint64_t seq);
  void on_timer(Local& l, std::uint64_t seq);
  sim::EntityId hop_entity(RegionId hop) const;

  Kernel& kernel_;
  CentralDatabase& central_;
  BackboneParams params_;
  Calibration calibration_;
  std::map<NodeId, GeoPoint> node_locations_;
  std::map<RegionId, Local> locals_;
  std::unordered_set<std::uint64_t> remote_seen_;
  std::vector<RecordKey> abandoned_;
};

}  // namespace drought::store
