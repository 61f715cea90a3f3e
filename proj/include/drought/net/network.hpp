#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "drought/env/environment.hpp"
#include "drought/events.hpp"
#include "drought/net/energy.hpp"
#include "drought/net/node_stack.hpp"
#include "drought/net/tree.hpp"

namespace drought::net {

struct LinkParams {
  Seconds delay_s = 1;  // frame start to arrival at the receiver
  double loss_prob = 0.0;  // per frame, per receiver
};

struct MacParams {
  std::size_t max_frame_bytes = 40;
  std::size_t queue_capacity = 64;  // frames
  std::uint32_t backoff_slots = 16;
  Seconds slot_s = 1;
  Seconds airtime_s = 1;  // channel occupancy per frame
};

struct DutyCycle {
  Seconds period_s = 1800;
  Seconds active_window_s = 300;
};

struct DiffusionParams {
  std::uint8_t interest_hop_limit = 8;
  AttributeMask attributes = kAllAttributes;
  // Task issued in combined mode, answered alongside the tree reports.
  AttributeMask query_attributes = attribute_bit(Field::Temperature) | attribute_bit(Field::Precipitation);
  std::uint16_t data_rate = 1;
  Seconds duration_s = 0;  // 0 = until the horizon
};

struct NetworkConfig {
  RoutingMode routing = RoutingMode::Tree;
  LinkParams link;
  MacParams mac;
  DutyCycle duty;
  EnergyParams energy;
  DiffusionParams diffusion;
  StackParams stack;
  double initial_battery_mj = 2.0e7;
  std::uint64_t seed = 1;
  SimTime horizon = sim::kDefaultHorizon;

  void validate() const;
};

struct RegionTopology {
  RegionId region = 0;
  std::vector<GeoPoint> positions;  // index 0 is the sink
  double link_range_km = 0.0;
  RoutingTree tree;
};

struct NodeCounters {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_dropped = 0;  // MAC queue overflow
  std::uint64_t frames_lost = 0;  // per receiver, on the channel
  std::uint64_t frames_received = 0;
  std::uint64_t asleep_drops = 0;
  std::uint64_t reports_originated = 0;
  std::uint64_t reports_forwarded = 0;
  std::uint64_t duplicates_dropped = 0;
  std::uint64_t mac_deferrals = 0;  // channel busy, backed off
  std::uint64_t mac_postponed = 0;  // too late in the active window
};

struct NodeInfo {
  NodeId id = 0;
  RegionId region = 0;
  std::size_t local_index = 0;
  GeoPoint position;
  std::vector<std::pair<NodeId, double>> neighbors;  // (node, distance_km)
  bool is_sink() const { return local_index == 0; }
};

// Shared medium of one region: carrier sense only, no collisions.
struct Channel {
  SimTime busy_until;
};

// The sensor tier: every node of every region as a kernel entity, with its
// MAC queue, energy ledger and protocol stack. Data reaching a sink is handed
// to local_base_station(region), which must be registered before running.
class SensorNetwork {
 public:
  SensorNetwork(Kernel& kernel, const env::EnvironmentModel& env, NetworkConfig cfg,
                std::vector<RegionTopology> regions);

  // Schedules every node's first wake at t = 0.
  void start();

  std::size_t node_count() const { return nodes_.size(); }
  const NodeInfo& info(NodeId id) const { return nodes_.at(id).info; }
  const NodeStack& stack(NodeId id) const { return nodes_.at(id).stack; }
  const EnergyLedger& energy(NodeId id) const { return nodes_.at(id).energy; }
  const NodeCounters& counters(NodeId id) const { return nodes_.at(id).counters; }
  std::size_t queue_length(NodeId id) const { return nodes_.at(id).queue.size(); }
  NodeId sink_of(RegionId region) const;
  const std::vector<RegionTopology>& regions() const { return regions_; }
  const NetworkConfig& config() const { return cfg_; }

  NodeCounters totals() const;
  EnergyLedger total_energy() const;

  // Signatures of unicast reports that died on a link or in a full queue.
  const std::unordered_set<std::uint64_t>& lost_reports() const { return lost_reports_; }
  // Unicast reports still sitting in a MAC queue (run over, no wake left to
  // send them), excluding any already in lost_reports().
  std::unordered_set<std::uint64_t> stranded_reports() const;
  // Reports a sensing node produced (tree, diffusion or flood; not queries).
  std::uint64_t reports_emitted() const { return reports_emitted_; }
  std::uint64_t query_responses() const { return query_responses_; }

  // Observers, mainly for tests. on_send fires when a packet is queued.
  std::function<void(SimTime, NodeId, const Outgoing&)> on_send;
  std::function<void(SimTime, NodeId, const Message&, NodeId from)> on_receive;

  // node_id,region,tx_mJ,rx_mJ,idle_mJ,sensing_mJ,frames_sent,frames_dropped,
  // reports_originated,reports_forwarded
  void write_energy_csv(std::ostream& out) const;

 private:
  struct Node {
    NodeInfo info;
    NodeStack stack;
    EnergyLedger energy;
    NodeCounters counters;
    sim::RngStream rng;
    std::optional<env::TruthSampler> sampler;
    Reassembler reassembler;
    std::deque<MacFrame> queue;
    bool awake = false;
    bool mac_pending = false;
    SimTime window_end;
    std::uint64_t next_uid = 0;
  };

  void handle(NodeId id, const Delivery& d);
  void on_wake(Node& n, std::uint64_t cycle);
  void on_sleep(Node& n);
  void on_mac_try(Node& n);
  void on_frame(Node& n, const MacFrame& frame);
  void sense_and_report(Node& n);
  void deliver_to_sink_app(Node& sink, const DataMessage& msg, NodeId last_hop);
  void dispatch(Node& n, const DataOutcome& outcome, NodeId last_hop, bool forwarded);
  bool enqueue(Node& n, const Outgoing& out);
  void kick(Node& n);
  NodeHealth health(const Node& n) const;
  std::uint32_t interest_id_for(RegionId region) const { return 1000 + region; }

  Kernel& kernel_;
  const env::EnvironmentModel& env_;
  NetworkConfig cfg_;
  std::vector<RegionTopology> regions_;
  std::vector<Node> nodes_;
  std::map<RegionId, Channel> channels_;
  std::map<RegionId, NodeId> sinks_;
  std::map<RegionId, double> link_range_;
  std::unordered_set<std::uint64_t> lost_reports_;
  std::uint64_t reports_emitted_ = 0;
  std::uint64_t query_responses_ = 0;
};

}  // namespace drought::net
