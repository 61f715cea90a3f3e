#include "drought/net/node_stack.hpp"

#include <algorithm>
#include <string>

#include "drought/errors.hpp"

namespace drought::net {

std::string_view routing_name(RoutingMode mode) {
  switch (mode) {
    case RoutingMode::Tree: return "tree";
    case RoutingMode::DirectedDiffusion: return "diffusion";
    case RoutingMode::Combined: return "combined";
    case RoutingMode::Flooding: return "flooding";
  }
  return "?";
}

std::optional<RoutingMode> parse_routing(std::string_view name) {
  for (auto m : {RoutingMode::Tree, RoutingMode::DirectedDiffusion, RoutingMode::Combined,
                 RoutingMode::Flooding}) {
    if (routing_name(m) == name) return m;
  }
  return std::nullopt;
}

bool DataCache::insert(std::uint64_t signature) {
  if (capacity_ == 0) return true;
  if (!members_.insert(signature).second) return false;
  order_.push_back(signature);
  if (order_.size() > capacity_) {
    members_.erase(order_.front());
    order_.pop_front();
  }
  return true;
}

NodeStack::NodeStack(NodeId self, bool is_sink, std::optional<NodeId> tree_parent, StackParams params)
    : self_(self),
      is_sink_(is_sink),
      tree_parent_(tree_parent),
      params_(params),
      cache_(params.data_cache_capacity) {}

Outgoing NodeStack::originate_interest(Interest interest, SimTime now) {
  interest.origin = self_;
  interest.validate();
  interests_[interest.interest_id] = {interest, now, now + interest.duration_s};
  return {LinkDest::broadcast(), interest};
}

GradientEntry* NodeStack::find_gradient(std::uint32_t interest_id, NodeId toward) {
  for (auto& g : gradients_) {
    if (g.interest_id == interest_id && g.toward == toward) return &g;
  }
  return nullptr;
}

std::vector<Outgoing> NodeStack::propagate_interest(const Interest& interest, NodeId from, SimTime now) {
  if (interest.hop_limit == 0 || interest.origin == self_) return {};
  const SimTime expires = now + interest.duration_s;
  std::vector<Outgoing> out;

  const bool seen = interests_.count(interest.interest_id) != 0;
  if (!seen) {
    interests_[interest.interest_id] = {interest, now, expires};
    if (interest.hop_limit > 1) {
      Interest next = interest;
      --next.hop_limit;
      out.push_back({LinkDest::broadcast(), next});
    }
  }
  if (GradientEntry* g = find_gradient(interest.interest_id, from)) {
    g->expires_at = expires;
  } else {
    gradients_.push_back({interest.interest_id, from, interest.data_rate, expires, false});
  }
  return out;
}

const GradientEntry* NodeStack::reinforced_gradient(std::uint32_t interest_id, SimTime now) const {
  for (const auto& g : gradients_) {
    if (g.interest_id == interest_id && g.reinforced && g.expires_at > now) return &g;
  }
  return nullptr;
}

std::vector<NodeId> NodeStack::live_targets(std::uint32_t interest_id, SimTime now, NodeId exclude) const {
  if (const GradientEntry* r = reinforced_gradient(interest_id, now)) {
    if (r->toward == exclude) return {};
    return {r->toward};
  }
  std::vector<NodeId> targets;
  for (const auto& g : gradients_) {
    if (g.interest_id == interest_id && g.expires_at > now && g.toward != exclude) {
      targets.push_back(g.toward);
    }
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  return targets;
}

DataOutcome NodeStack::send_matching_data(const SensorReading& reading, SimTime now, NodeHealth health) {
  DataOutcome outcome;
  for (const auto& [id, cached] : interests_) {
    if (cached.expires_at <= now) continue;
    if ((cached.interest.attributes & params_.sensed) == 0) continue;
    DataMessage msg = make_data_message(id, reading, health, tree_parent_.value_or(kNoNode));
    cache_.insert(msg.signature);
    if (is_sink_) {
      outcome.delivered.push_back(msg);
      continue;
    }
    auto targets = live_targets(id, now, kNoNode);
    if (targets.empty()) continue;
    outcome.out.push_back({LinkDest{std::move(targets)}, msg});
  }
  return outcome;
}

std::optional<Outgoing> NodeStack::tree_report(const SensorReading& reading, NodeHealth health) {
  if (is_sink_) return std::nullopt;
  if (!tree_parent_) throw OrphanNode("node " + std::to_string(self_) + " has no tree parent");
  DataMessage msg = make_data_message(kTreeReport, reading, health, *tree_parent_);
  cache_.insert(msg.signature);
  return Outgoing{LinkDest::unicast(*tree_parent_), msg};
}

DataOutcome NodeStack::flood_report(const SensorReading& reading, NodeHealth health) {
  DataOutcome outcome;
  DataMessage msg = make_data_message(kTreeReport, reading, health, tree_parent_.value_or(kNoNode));
  msg.flooded = true;
  msg.hop_limit = params_.flood_hop_limit;
  cache_.insert(msg.signature);
  if (is_sink_) {
    outcome.delivered.push_back(msg);
  } else if (msg.hop_limit > 0) {
    outcome.out.push_back({LinkDest::broadcast(), msg});
  }
  return outcome;
}

DataOutcome NodeStack::on_data(DataMessage msg, NodeId from, SimTime now) {
  DataOutcome outcome;
  if (!cache_.insert(msg.signature)) {
    outcome.duplicate = true;
    return outcome;
  }
  ++msg.hop_count;

  if (msg.flooded) {
    if (is_sink_) {
      outcome.delivered.push_back(msg);
    } else if (msg.hop_limit > 1) {
      --msg.hop_limit;
      outcome.out.push_back({LinkDest::broadcast(), msg});
    }
    return outcome;
  }

  if (msg.interest_id == kTreeReport) {
    if (is_sink_) {
      outcome.delivered.push_back(msg);
      return outcome;
    }
    if (!tree_parent_) throw OrphanNode("node " + std::to_string(self_) + " has no tree parent");
    outcome.out.push_back({LinkDest::unicast(*tree_parent_), msg});
    return outcome;
  }

  const auto key = std::make_pair(msg.interest_id, msg.source);
  const bool first = first_deliverer_.emplace(key, from).second;
  if (is_sink_) {
    outcome.delivered.push_back(msg);
    const auto it = interests_.find(msg.interest_id);
    if (first && it != interests_.end() && it->second.interest.origin == self_) {
      outcome.out.push_back(reinforce(from, msg.interest_id, msg.source));
    }
    return outcome;
  }
  auto targets = live_targets(msg.interest_id, now, from);
  if (!targets.empty()) outcome.out.push_back({LinkDest{std::move(targets)}, msg});
  return outcome;
}

Outgoing NodeStack::reinforce(NodeId neighbor, std::uint32_t interest_id, NodeId source) const {
  const auto it = interests_.find(interest_id);
  if (it == interests_.end() || it->second.interest.origin != self_) {
    throw UnknownInterest("node " + std::to_string(self_) + " did not originate interest " +
                          std::to_string(interest_id));
  }
  const std::uint16_t rate = static_cast<std::uint16_t>(it->second.interest.data_rate * 2);
  return {LinkDest::unicast(neighbor), Reinforcement{interest_id, source, self_, rate}};
}

std::vector<Outgoing> NodeStack::on_reinforcement(const Reinforcement& r, NodeId from, SimTime now) {
  if (reinforced_gradient(r.interest_id, now) == nullptr) {
    if (GradientEntry* g = find_gradient(r.interest_id, from); g != nullptr && g->expires_at > now) {
      g->reinforced = true;
      g->data_rate = r.data_rate;
    }
  }
  if (r.source == self_) return {};
  const auto key = std::make_pair(r.interest_id, r.source);
  const auto next = first_deliverer_.find(key);
  if (next == first_deliverer_.end()) return {};
  if (!reinforcement_forwarded_.insert(key).second) return {};
  return {{LinkDest::unicast(next->second), r}};
}

std::optional<NodeId> NodeStack::first_deliverer(std::uint32_t interest_id, NodeId source) const {
  const auto it = first_deliverer_.find({interest_id, source});
  if (it == first_deliverer_.end()) return std::nullopt;
  return it->second;
}

}  // namespace drought::net
