#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "drought/net/packet.hpp"

namespace drought::net {

enum class RoutingMode : std::uint8_t {
  Tree,
  DirectedDiffusion,
  Combined,  // tree for periodic reports, diffusion for queries
  Flooding,
};

std::string_view routing_name(RoutingMode mode);
std::optional<RoutingMode> parse_routing(std::string_view name);

struct Outgoing {
  LinkDest dest;
  Message msg;
};

struct GradientEntry {
  std::uint32_t interest_id = 0;
  NodeId toward = kNoNode;
  std::uint16_t data_rate = 1;
  SimTime expires_at;
  bool reinforced = false;

  friend bool operator==(const GradientEntry&, const GradientEntry&) = default;
};

struct CachedInterest {
  Interest interest;
  SimTime received_at;
  SimTime expires_at;
};

// FIFO set of recently seen data signatures.
class DataCache {
 public:
  explicit DataCache(std::size_t capacity) : capacity_(capacity) {}

  bool contains(std::uint64_t signature) const { return members_.count(signature) != 0; }
  // False if already present; otherwise inserts, evicting the oldest when full.
  bool insert(std::uint64_t signature);

  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<std::uint64_t>& order() const { return order_; }

 private:
  std::size_t capacity_;
  std::deque<std::uint64_t> order_;
  std::unordered_set<std::uint64_t> members_;
};

struct StackParams {
  std::size_t data_cache_capacity = 64;
  std::uint8_t flood_hop_limit = 8;
  AttributeMask sensed = kAllAttributes;
};

struct DataOutcome {
  bool duplicate = false;
  std::vector<DataMessage> delivered;  // non-empty only at the sink
  std::vector<Outgoing> out;
};

// Protocol state of one node. Everything here is pure bookkeeping: callers
// feed in received messages and get back the transmissions to make.
class NodeStack {
 public:
  NodeStack(NodeId self, bool is_sink, std::optional<NodeId> tree_parent, StackParams params = {});

  NodeId id() const { return self_; }
  bool is_sink() const { return is_sink_; }
  std::optional<NodeId> tree_parent() const { return tree_parent_; }

  // Sink only: caches the task and returns its first broadcast.
  Outgoing originate_interest(Interest interest, SimTime now);

  std::vector<Outgoing> propagate_interest(const Interest& interest, NodeId from, SimTime now);

  // A fresh local reading, sent along every matching diffusion task.
  DataOutcome send_matching_data(const SensorReading& reading, SimTime now, NodeHealth health);

  // Periodic report to the tree parent. Empty for the sink.
  std::optional<Outgoing> tree_report(const SensorReading& reading, NodeHealth health);

  // Broadcast a reading network-wide with the flooding hop limit.
  DataOutcome flood_report(const SensorReading& reading, NodeHealth health);

  // Duplicate suppression plus the mode-specific forwarding rule.
  DataOutcome on_data(DataMessage msg, NodeId from, SimTime now);

  // Sink: reinforce `neighbor` for data from `source`.
  Outgoing reinforce(NodeId neighbor, std::uint32_t interest_id, NodeId source) const;

  std::vector<Outgoing> on_reinforcement(const Reinforcement& r, NodeId from, SimTime now);

  const std::map<std::uint32_t, CachedInterest>& interests() const { return interests_; }
  const std::vector<GradientEntry>& gradients() const { return gradients_; }
  const DataCache& data_cache() const { return cache_; }
  std::optional<NodeId> first_deliverer(std::uint32_t interest_id, NodeId source) const;
  const GradientEntry* reinforced_gradient(std::uint32_t interest_id, SimTime now) const;

 private:
  GradientEntry* find_gradient(std::uint32_t interest_id, NodeId toward);
  std::vector<NodeId> live_targets(std::uint32_t interest_id, SimTime now, NodeId exclude) const;

  NodeId self_;
  bool is_sink_;
  std::optional<NodeId> tree_parent_;
  StackParams params_;
  std::map<std::uint32_t, CachedInterest> interests_;
  std::vector<GradientEntry> gradients_;
  DataCache cache_;
  std::map<std::pair<std::uint32_t, NodeId>, NodeId> first_deliverer_;
  std::set<std::pair<std::uint32_t, NodeId>> reinforcement_forwarded_;
};

}  // namespace drought::net
