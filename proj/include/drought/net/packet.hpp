#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "drought/core/types.hpp"

namespace drought::net {

enum class PacketKind : std::uint8_t {
  Data = 1,
  Interest = 2,
  Reinforcement = 3,
};

// Bitmask over Field values.
using AttributeMask = std::uint16_t;
inline constexpr AttributeMask kAllAttributes = (1u << kFieldCount) - 1;

inline constexpr AttributeMask attribute_bit(Field f) {
  return static_cast<AttributeMask>(1u << static_cast<unsigned>(f));
}

// Tree reports travel with interest id 0.
inline constexpr std::uint32_t kTreeReport = 0;

struct NodeHealth {
  double battery_mj = 0.0;
  std::uint32_t frames_dropped = 0;

  friend bool operator==(const NodeHealth&, const NodeHealth&) = default;
};

struct DataMessage {
  std::uint32_t interest_id = kTreeReport;
  NodeId source = kNoNode;
  SensorReading reading;
  std::uint8_t hop_count = 0;
  std::uint8_t hop_limit = 0;  // only meaningful when flooded
  bool flooded = false;
  NodeId route_hint = kNoNode;  // source's tree parent, if any
  NodeHealth health;
  std::uint64_t signature = 0;

  friend bool operator==(const DataMessage&, const DataMessage&) = default;
};

std::uint64_t data_signature(NodeId source, SimTime timestamp, std::uint32_t interest_id);

DataMessage make_data_message(std::uint32_t interest_id, const SensorReading& reading,
                              NodeHealth health, NodeId route_hint);

struct Interest {
  std::uint32_t interest_id = 0;
  AttributeMask attributes = kAllAttributes;
  std::uint32_t interval_s = 1800;
  std::uint32_t duration_s = 0;
  std::uint8_t hop_limit = 1;
  NodeId origin = kNoNode;
  std::uint16_t data_rate = 1;

  void validate() const;
  friend bool operator==(const Interest&, const Interest&) = default;
};

// Sent hop by hop from the sink back toward `source` along first deliverers.
struct Reinforcement {
  std::uint32_t interest_id = 0;
  NodeId source = kNoNode;
  NodeId origin = kNoNode;
  std::uint16_t data_rate = 2;

  friend bool operator==(const Reinforcement&, const Reinforcement&) = default;
};

using Message = std::variant<DataMessage, Interest, Reinforcement>;

inline constexpr std::size_t kDataMessageBytes = 64;
inline constexpr std::size_t kInterestBytes = 32;
inline constexpr std::size_t kReinforcementBytes = 16;

// Fixed little-endian layouts; readings travel as 32-bit floats.
std::vector<std::uint8_t> encode(const Message& msg);
Message decode(const std::vector<std::uint8_t>& bytes);
PacketKind kind_of(const Message& msg);

// Link-layer addressing. An empty target list means broadcast to every
// neighbor; otherwise only the listed neighbors accept the frames.
struct LinkDest {
  std::vector<NodeId> targets;

  static LinkDest broadcast() { return {}; }
  static LinkDest unicast(NodeId n) { return {{n}}; }
  bool is_broadcast() const { return targets.empty(); }
  bool addresses(NodeId n) const;

  friend bool operator==(const LinkDest&, const LinkDest&) = default;
};

struct Packet {
  PacketKind kind = PacketKind::Data;
  NodeId sender = kNoNode;
  std::uint64_t uid = 0;  // per-sender sequence number
  LinkDest dest;
  std::uint64_t signature = 0;  // data packets only
  std::vector<std::uint8_t> bytes;
};

struct MacFrame {
  std::shared_ptr<const Packet> packet;
  std::uint16_t index = 0;
  std::uint16_t total = 1;

  std::size_t offset(std::size_t max_frame_bytes) const { return index * max_frame_bytes; }
  std::size_t length(std::size_t max_frame_bytes) const;
};

std::size_t fragment_count(std::size_t packet_bytes, std::size_t max_frame_bytes);
std::vector<MacFrame> fragment(std::shared_ptr<const Packet> packet, std::size_t max_frame_bytes);

// Collects fragments per (sender, uid). Incomplete entries older than
// `max_age` are discarded the next time a new packet starts.
class Reassembler {
 public:
  Reassembler(std::size_t max_frame_bytes, Seconds max_age)
      : max_frame_bytes_(max_frame_bytes), max_age_(max_age) {}

  // Returns the packet bytes once every fragment has arrived.
  std::optional<std::vector<std::uint8_t>> add(const MacFrame& frame, SimTime now);

  std::size_t partial() const { return partial_.size(); }
  std::uint64_t purged() const { return purged_; }

 private:
  struct Partial {
    SimTime started;
    std::vector<std::uint8_t> bytes;
    std::vector<bool> have;
    std::uint16_t received = 0;
  };

  std::size_t max_frame_bytes_;
  Seconds max_age_;
  std::map<std::pair<NodeId, std::uint64_t>, Partial> partial_;
  std::uint64_t purged_ = 0;
};

}  // namespace drought::net
