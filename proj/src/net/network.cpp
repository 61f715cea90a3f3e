#include "drought/net/network.hpp"

#include <algorithm>
#include <string>

#include <fmt/format.h>

#include "drought/coverage/planner.hpp"
#include "drought/errors.hpp"

namespace drought::net {

void NetworkConfig::validate() const {
  if (!(link.loss_prob >= 0.0 && link.loss_prob <= 1.0)) {
    throw ValidationError("link loss_prob must be in [0,1]");
  }
  if (link.delay_s == 0) throw ValidationError("link delay_s must be >= 1");
  if (mac.max_frame_bytes == 0) throw ValidationError("mac max_frame_bytes must be > 0");
  if (mac.queue_capacity == 0) throw ValidationError("mac queue_capacity must be > 0");
  if (mac.backoff_slots == 0) throw ValidationError("mac backoff_slots must be > 0");
  if (mac.slot_s == 0) throw ValidationError("mac slot_s must be > 0");
  if (duty.period_s == 0) throw ValidationError("reporting period must be > 0");
  if (duty.active_window_s == 0 || duty.active_window_s > duty.period_s) {
    throw ValidationError("active window must be in (0, reporting period]");
  }
  if (diffusion.interest_hop_limit == 0) throw ValidationError("interest hop_limit must be >= 1");
  energy.validate();
}

SensorNetwork::SensorNetwork(Kernel& kernel, const env::EnvironmentModel& env, NetworkConfig cfg,
                             std::vector<RegionTopology> regions)
    : kernel_(kernel), env_(env), cfg_(cfg), regions_(std::move(regions)) {
  cfg_.validate();
  for (const auto& topo : regions_) {
    if (topo.positions.empty()) throw ValidationError(fmt::format("region {} has no nodes", topo.region));
    if (topo.tree.size() != topo.positions.size()) {
      throw ValidationError(fmt::format("region {} tree does not match its placement", topo.region));
    }
    const NodeId base = static_cast<NodeId>(nodes_.size());
    sinks_[topo.region] = base;
    channels_[topo.region] = Channel{};
    link_range_[topo.region] = topo.link_range_km;
    const auto adj = coverage::neighbor_lists(topo.positions, topo.link_range_km);
    for (std::size_t j = 0; j < topo.positions.size(); ++j) {
      const NodeId id = base + static_cast<NodeId>(j);
      const auto parent = topo.tree.parent[j];
      std::optional<NodeId> parent_id;
      if (parent) parent_id = base + static_cast<NodeId>(*parent);
      const bool needs_tree = cfg_.routing == RoutingMode::Tree || cfg_.routing == RoutingMode::Combined;
      if (needs_tree && j != 0 && !parent_id) throw OrphanNode(fmt::format("node {} has no tree parent", id));

      NodeInfo info{id, topo.region, j, topo.positions[j], {}};
      for (std::size_t k : adj[j]) {
        info.neighbors.emplace_back(base + static_cast<NodeId>(k),
                                    distance_km(topo.positions[j], topo.positions[k]));
      }
      Node node{std::move(info),
                NodeStack(id, j == 0, parent_id, cfg_.stack),
                EnergyLedger{},
                NodeCounters{},
                sim::RngStream(cfg_.seed, fmt::format("node:{}", id)),
                std::nullopt,
                Reassembler(cfg_.mac.max_frame_bytes, 2 * cfg_.duty.period_s),
                {},
                false,
                false,
                SimTime(0),
                0};
      if (j != 0) node.sampler.emplace(env_.sampler(topo.region, id, topo.positions[j], cfg_.duty.period_s));
      nodes_.push_back(std::move(node));
    }
  }
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    kernel_.add_entity(sim::sensor_node(id), [this, id](const Delivery& d) { handle(id, d); });
  }
}

void SensorNetwork::start() {
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    kernel_.schedule(SimTime(0), sim::sensor_node(id), WakeTimer{0});
  }
}

NodeId SensorNetwork::sink_of(RegionId region) const {
  const auto it = sinks_.find(region);
  if (it == sinks_.end()) throw UnknownRegion("no sensor network for region " + std::to_string(region));
  return it->second;
}

void SensorNetwork::handle(NodeId id, const Delivery& d) {
  Node& n = nodes_[id];
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, WakeTimer>) {
          on_wake(n, ev.cycle);
        } else if constexpr (std::is_same_v<T, SleepTimer>) {
          on_sleep(n);
        } else if constexpr (std::is_same_v<T, MacTry>) {
          on_mac_try(n);
        } else if constexpr (std::is_same_v<T, FrameArrival>) {
          on_frame(n, ev.frame);
        } else {
          throw Error("sensor node " + std::to_string(id) + " got an unexpected " +
                      std::string(payload_tag(d.payload)) + " event");
        }
      },
      d.payload);
}

NodeHealth SensorNetwork::health(const Node& n) const {
  const double left = std::max(0.0, cfg_.initial_battery_mj - n.energy.total_mj());
  return {left, static_cast<std::uint32_t>(n.counters.frames_dropped)};
}

void SensorNetwork::on_wake(Node& n, std::uint64_t cycle) {
  const SimTime now = kernel_.now();
  const auto self = sim::sensor_node(n.info.id);
  n.awake = true;
  n.window_end = now + cfg_.duty.active_window_s;
  kernel_.schedule(n.window_end, self, SleepTimer{});
  const SimTime next = now + cfg_.duty.period_s;
  if (next < cfg_.horizon) kernel_.schedule(next, self, WakeTimer{cycle + 1});

  const bool diffusion = cfg_.routing == RoutingMode::DirectedDiffusion || cfg_.routing == RoutingMode::Combined;
  if (n.info.is_sink() && cycle == 0 && diffusion) {
    Interest interest;
    interest.interest_id = interest_id_for(n.info.region);
    interest.attributes = cfg_.routing == RoutingMode::Combined ? cfg_.diffusion.query_attributes
                                                                : cfg_.diffusion.attributes;
    interest.interval_s = static_cast<std::uint32_t>(cfg_.duty.period_s);
    const Seconds duration = cfg_.diffusion.duration_s != 0 ? cfg_.diffusion.duration_s
                                                            : cfg_.horizon.seconds() - now.seconds();
    interest.duration_s = static_cast<std::uint32_t>(std::max<Seconds>(1, duration));
    interest.hop_limit = cfg_.diffusion.interest_hop_limit;
    interest.data_rate = cfg_.diffusion.data_rate;
    enqueue(n, n.stack.originate_interest(interest, now));
  }
  if (!n.info.is_sink()) sense_and_report(n);
  kick(n);
}

void SensorNetwork::sense_and_report(Node& n) {
  const SimTime now = kernel_.now();
  const SensorReading reading = n.sampler->sample_truth(now);
  n.energy.charge_sense(cfg_.energy);
  const NodeHealth h = health(n);

  auto emit = [&](const Outgoing& out) {
    if (enqueue(n, out)) {
      ++n.counters.reports_originated;
    }
  };
  switch (cfg_.routing) {
    case RoutingMode::Tree: {
      ++reports_emitted_;
      if (auto out = n.stack.tree_report(reading, h)) emit(*out);
      break;
    }
    case RoutingMode::Combined: {
      ++reports_emitted_;
      if (auto out = n.stack.tree_report(reading, h)) emit(*out);
      for (const auto& out : n.stack.send_matching_data(reading, now, h).out) emit(out);
      break;
    }
    case RoutingMode::DirectedDiffusion: {
      const DataOutcome outcome = n.stack.send_matching_data(reading, now, h);
      reports_emitted_ += outcome.out.size();
      for (const auto& out : outcome.out) emit(out);
      break;
    }
    case RoutingMode::Flooding: {
      ++reports_emitted_;
      for (const auto& out : n.stack.flood_report(reading, h).out) emit(out);
      break;
    }
  }
}

void SensorNetwork::on_sleep(Node& n) {
  n.awake = false;
  n.energy.charge_idle(cfg_.energy, static_cast<double>(cfg_.duty.active_window_s));
}

bool SensorNetwork::enqueue(Node& n, const Outgoing& out) {
  auto packet = std::make_shared<Packet>();
  packet->kind = kind_of(out.msg);
  packet->sender = n.info.id;
  packet->uid = n.next_uid++;
  packet->dest = out.dest;
  if (const auto* d = std::get_if<DataMessage>(&out.msg)) packet->signature = d->signature;
  packet->bytes = encode(out.msg);

  const bool unicast_data = packet->kind == PacketKind::Data && packet->dest.targets.size() == 1;
  auto frames = fragment(std::move(packet), cfg_.mac.max_frame_bytes);
  if (n.queue.size() + frames.size() > cfg_.mac.queue_capacity) {
    n.counters.frames_dropped += frames.size();
    if (unicast_data) lost_reports_.insert(frames.front().packet->signature);
    return false;
  }
  if (on_send) on_send(kernel_.now(), n.info.id, out);
  for (auto& f : frames) n.queue.push_back(std::move(f));
  return true;
}

void SensorNetwork::kick(Node& n) {
  if (n.mac_pending || n.queue.empty() || !n.awake) return;
  n.mac_pending = true;
  kernel_.schedule(kernel_.now(), sim::sensor_node(n.info.id), MacTry{});
}

void SensorNetwork::on_mac_try(Node& n) {
  n.mac_pending = false;
  if (n.queue.empty()) return;
  const SimTime now = kernel_.now();
  const auto self = sim::sensor_node(n.info.id);
  const Seconds flight = std::max(cfg_.mac.airtime_s, cfg_.link.delay_s);
  if (!n.awake || now + flight >= n.window_end) {
    ++n.counters.mac_postponed;  // the next wake restarts the MAC
    return;
  }
  Channel& channel = channels_[n.info.region];
  if (channel.busy_until > now) {
    ++n.counters.mac_deferrals;
    const Seconds slots = n.rng.uniform_int(1, cfg_.mac.backoff_slots);
    n.mac_pending = true;
    kernel_.schedule(now + slots * cfg_.mac.slot_s, self, MacTry{});
    return;
  }

  const MacFrame frame = std::move(n.queue.front());
  n.queue.pop_front();
  channel.busy_until = now + cfg_.mac.airtime_s;
  ++n.counters.frames_sent;

  const Packet& p = *frame.packet;
  const std::size_t bytes = frame.length(cfg_.mac.max_frame_bytes);
  double distance = 0.0;
  if (p.dest.is_broadcast()) {
    distance = link_range_[n.info.region];
  } else {
    for (const auto& [nb, d] : n.info.neighbors) {
      if (p.dest.addresses(nb)) distance = std::max(distance, d);
    }
  }
  n.energy.charge_tx(cfg_.energy, bytes, distance);

  const bool unicast_data = p.kind == PacketKind::Data && p.dest.targets.size() == 1;
  for (const auto& [nb, d] : n.info.neighbors) {
    if (!p.dest.addresses(nb)) continue;
    if (n.rng.bernoulli(cfg_.link.loss_prob)) {
      ++n.counters.frames_lost;
      if (unicast_data) lost_reports_.insert(p.signature);
      continue;
    }
    kernel_.send_delayed(self, sim::sensor_node(nb), FrameArrival{frame}, cfg_.link.delay_s);
  }

  if (!n.queue.empty()) {
    n.mac_pending = true;
    kernel_.schedule(now + cfg_.mac.airtime_s, self, MacTry{});
  }
}

void SensorNetwork::on_frame(Node& n, const MacFrame& frame) {
  if (!n.awake) {
    ++n.counters.asleep_drops;
    return;
  }
  const SimTime now = kernel_.now();
  n.energy.charge_rx(cfg_.energy, frame.length(cfg_.mac.max_frame_bytes));
  ++n.counters.frames_received;
  auto bytes = n.reassembler.add(frame, now);
  if (!bytes) return;

  const NodeId from = frame.packet->sender;
  const Message msg = decode(*bytes);
  if (on_receive) on_receive(now, n.info.id, msg, from);

  if (const auto* interest = std::get_if<Interest>(&msg)) {
    for (const auto& out : n.stack.propagate_interest(*interest, from, now)) enqueue(n, out);
  } else if (const auto* r = std::get_if<Reinforcement>(&msg)) {
    for (const auto& out : n.stack.on_reinforcement(*r, from, now)) enqueue(n, out);
  } else {
    const DataOutcome outcome = n.stack.on_data(std::get<DataMessage>(msg), from, now);
    if (outcome.duplicate) ++n.counters.duplicates_dropped;
    dispatch(n, outcome, from, true);
  }
  kick(n);
}

void SensorNetwork::dispatch(Node& n, const DataOutcome& outcome, NodeId last_hop, bool forwarded) {
  for (const auto& msg : outcome.delivered) deliver_to_sink_app(n, msg, last_hop);
  for (const auto& out : outcome.out) {
    const bool is_data = std::holds_alternative<DataMessage>(out.msg);
    if (enqueue(n, out) && forwarded && is_data) ++n.counters.reports_forwarded;
  }
}

void SensorNetwork::deliver_to_sink_app(Node& sink, const DataMessage& msg, NodeId last_hop) {
  if (cfg_.routing == RoutingMode::Combined && msg.interest_id != kTreeReport) {
    ++query_responses_;
    return;
  }
  kernel_.send_delayed(sim::sensor_node(sink.info.id), sim::local_base_station(sink.info.region),
                       SinkHandoff{msg, last_hop}, 0);
}

std::unordered_set<std::uint64_t> SensorNetwork::stranded_reports() const {
  std::unordered_set<std::uint64_t> out;
  for (const auto& n : nodes_) {
    for (const auto& f : n.queue) {
      const Packet& p = *f.packet;
      if (p.kind == PacketKind::Data && p.dest.targets.size() == 1 && lost_reports_.count(p.signature) == 0) {
        out.insert(p.signature);
      }
    }
  }
  return out;
}

NodeCounters SensorNetwork::totals() const {
  NodeCounters t;
  for (const auto& n : nodes_) {
    const auto& c = n.counters;
    t.frames_sent += c.frames_sent;
    t.frames_dropped += c.frames_dropped;
    t.frames_lost += c.frames_lost;
    t.frames_received += c.frames_received;
    t.asleep_drops += c.asleep_drops;
    t.reports_originated += c.reports_originated;
    t.reports_forwarded += c.reports_forwarded;
    t.duplicates_dropped += c.duplicates_dropped;
    t.mac_deferrals += c.mac_deferrals;
    t.mac_postponed += c.mac_postponed;
  }
  return t;
}

EnergyLedger SensorNetwork::total_energy() const {
  EnergyLedger e;
  for (const auto& n : nodes_) {
    e.tx_mj += n.energy.tx_mj;
    e.rx_mj += n.energy.rx_mj;
    e.idle_mj += n.energy.idle_mj;
    e.sensing_mj += n.energy.sensing_mj;
  }
  return e;
}

void SensorNetwork::write_energy_csv(std::ostream& out) const {
  out << "node_id,region,tx_mJ,rx_mJ,idle_mJ,sensing_mJ,frames_sent,frames_dropped,"
         "reports_originated,reports_forwarded\n";
  for (const auto& n : nodes_) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", n.info.id, n.info.region, n.energy.tx_mj,
                       n.energy.rx_mj, n.energy.idle_mj, n.energy.sensing_mj, n.counters.frames_sent,
                       n.counters.frames_dropped, n.counters.reports_originated,
                       n.counters.reports_forwarded);
  }
}

}  // namespace drought::net
