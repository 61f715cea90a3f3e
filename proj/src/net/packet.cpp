#include "drought/net/packet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "drought/errors.hpp"

namespace drought::net {

namespace {

constexpr std::uint16_t kNoNode16 = 0xFFFF;

class Writer {
 public:
  explicit Writer(std::size_t size) : buf_(size, 0) {}

  void u8(std::uint8_t v) { buf_.at(pos_++) = v; }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void node(NodeId n) { u16(n == kNoNode ? kNoNode16 : static_cast<std::uint16_t>(n)); }

  std::vector<std::uint8_t> finish() { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.at(pos_++) = static_cast<std::uint8_t>(v >> (8 * i));
  }

  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  std::uint8_t u8() { return take(1); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(take(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::uint64_t u64() { return take(8); }
  double f32() { return std::bit_cast<float>(u32()); }
  NodeId node() {
    const std::uint16_t v = u16();
    return v == kNoNode16 ? kNoNode : v;
  }

 private:
  std::uint64_t take(int n) {
    if (pos_ + n > buf_.size()) throw DecodeError("packet truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
    return v;
  }

  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

void check_node(NodeId n) {
  if (n != kNoNode && n >= kNoNode16) {
    throw DecodeError("node id " + std::to_string(n) + " does not fit the 16-bit wire field");
  }
}

std::vector<std::uint8_t> encode_data(const DataMessage& m) {
  check_node(m.source);
  check_node(m.route_hint);
  Writer w(kDataMessageBytes);
  w.u8(static_cast<std::uint8_t>(PacketKind::Data));
  w.u8(m.hop_count);
  w.node(m.source);
  w.u32(m.interest_id);
  w.u64(m.signature);
  w.u32(static_cast<std::uint32_t>(m.reading.timestamp.seconds()));
  w.u8(static_cast<std::uint8_t>(m.reading.region_id));
  w.u8(m.flooded ? 1 : 0);
  w.node(m.route_hint);
  for (Field f : kAllFields) w.f32(m.reading.values.get(f));
  w.f32(m.health.battery_mj);
  w.u32(m.health.frames_dropped);
  w.u8(m.hop_limit);
  return w.finish();
}

DataMessage decode_data(Reader& r) {
  DataMessage m;
  m.hop_count = r.u8();
  m.source = r.node();
  m.interest_id = r.u32();
  m.signature = r.u64();
  m.reading.timestamp = SimTime(r.u32());
  m.reading.region_id = r.u8();
  m.flooded = (r.u8() & 1) != 0;
  m.route_hint = r.node();
  for (Field f : kAllFields) m.reading.values.set(f, r.f32());
  m.health.battery_mj = r.f32();
  m.health.frames_dropped = r.u32();
  m.hop_limit = r.u8();
  m.reading.node_id = m.source;
  return m;
}

std::vector<std::uint8_t> encode_interest(const Interest& m) {
  check_node(m.origin);
  Writer w(kInterestBytes);
  w.u8(static_cast<std::uint8_t>(PacketKind::Interest));
  w.u8(m.hop_limit);
  w.u16(m.attributes);
  w.u32(m.interest_id);
  w.node(m.origin);
  w.u16(m.data_rate);
  w.u32(m.interval_s);
  w.u32(m.duration_s);
  return w.finish();
}

Interest decode_interest(Reader& r) {
  Interest m;
  m.hop_limit = r.u8();
  m.attributes = r.u16();
  m.interest_id = r.u32();
  m.origin = r.node();
  m.data_rate = r.u16();
  m.interval_s = r.u32();
  m.duration_s = r.u32();
  return m;
}

std::vector<std::uint8_t> encode_reinforcement(const Reinforcement& m) {
  check_node(m.source);
  check_node(m.origin);
  Writer w(kReinforcementBytes);
  w.u8(static_cast<std::uint8_t>(PacketKind::Reinforcement));
  w.u8(0);
  w.node(m.source);
  w.u32(m.interest_id);
  w.node(m.origin);
  w.u16(m.data_rate);
  return w.finish();
}

Reinforcement decode_reinforcement(Reader& r) {
  Reinforcement m;
  r.u8();
  m.source = r.node();
  m.interest_id = r.u32();
  m.origin = r.node();
  m.data_rate = r.u16();
  return m;
}

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t data_signature(NodeId source, SimTime timestamp, std::uint32_t interest_id) {
  std::uint64_t h = mix(0x5eed'0000'0000'0000ull ^ source);
  h = mix(h ^ timestamp.seconds());
  return mix(h ^ interest_id);
}

DataMessage make_data_message(std::uint32_t interest_id, const SensorReading& reading,
                              NodeHealth health, NodeId route_hint) {
  DataMessage m;
  m.interest_id = interest_id;
  m.source = reading.node_id;
  m.reading = reading;
  m.route_hint = route_hint;
  m.health = health;
  m.signature = data_signature(reading.node_id, reading.timestamp, interest_id);
  return m;
}

void Interest::validate() const {
  if (interval_s == 0) throw ValidationError("interest interval_s must be > 0");
  if (duration_s == 0) throw ValidationError("interest duration_s must be > 0");
  if (hop_limit < 1) throw ValidationError("interest hop_limit must be >= 1");
  if ((attributes & kAllAttributes) == 0) throw ValidationError("interest needs at least one attribute");
}

PacketKind kind_of(const Message& msg) {
  switch (msg.index()) {
    case 0: return PacketKind::Data;
    case 1: return PacketKind::Interest;
    default: return PacketKind::Reinforcement;
  }
}

std::vector<std::uint8_t> encode(const Message& msg) {
  if (const auto* d = std::get_if<DataMessage>(&msg)) return encode_data(*d);
  if (const auto* i = std::get_if<Interest>(&msg)) return encode_interest(*i);
  return encode_reinforcement(std::get<Reinforcement>(msg));
}

Message decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.empty()) throw DecodeError("empty packet");
  Reader r(bytes);
  switch (static_cast<PacketKind>(r.u8())) {
    case PacketKind::Data:
      if (bytes.size() != kDataMessageBytes) throw DecodeError("data packet must be 64 bytes");
      return decode_data(r);
    case PacketKind::Interest:
      if (bytes.size() != kInterestBytes) throw DecodeError("interest packet must be 32 bytes");
      return decode_interest(r);
    case PacketKind::Reinforcement:
      if (bytes.size() != kReinforcementBytes) throw DecodeError("reinforcement packet must be 16 bytes");
      return decode_reinforcement(r);
  }
  throw DecodeError("unknown packet type " + std::to_string(bytes[0]));
}

bool LinkDest::addresses(NodeId n) const {
  return targets.empty() || std::find(targets.begin(), targets.end(), n) != targets.end();
}

std::size_t MacFrame::length(std::size_t max_frame_bytes) const {
  const std::size_t size = packet->bytes.size();
  return std::min(max_frame_bytes, size - offset(max_frame_bytes));
}

std::size_t fragment_count(std::size_t packet_bytes, std::size_t max_frame_bytes) {
  if (max_frame_bytes == 0) throw ValidationError("max_frame_bytes must be > 0");
  return std::max<std::size_t>(1, (packet_bytes + max_frame_bytes - 1) / max_frame_bytes);
}

std::vector<MacFrame> fragment(std::shared_ptr<const Packet> packet, std::size_t max_frame_bytes) {
  const auto total = static_cast<std::uint16_t>(fragment_count(packet->bytes.size(), max_frame_bytes));
  std::vector<MacFrame> frames;
  frames.reserve(total);
  for (std::uint16_t i = 0; i < total; ++i) frames.push_back({packet, i, total});
  return frames;
}

std::optional<std::vector<std::uint8_t>> Reassembler::add(const MacFrame& frame, SimTime now) {
  const Packet& p = *frame.packet;
  if (frame.total == 1) return p.bytes;

  const auto key = std::make_pair(p.sender, p.uid);
  auto it = partial_.find(key);
  if (it == partial_.end()) {
    for (auto old = partial_.begin(); old != partial_.end();) {
      if (now - old->second.started > max_age_) {
        old = partial_.erase(old);
        ++purged_;
      } else {
        ++old;
      }
    }
    Partial fresh{now, std::vector<std::uint8_t>(p.bytes.size()), std::vector<bool>(frame.total), 0};
    it = partial_.emplace(key, std::move(fresh)).first;
  }
  Partial& part = it->second;
  if (part.have[frame.index]) return std::nullopt;
  const std::size_t off = frame.offset(max_frame_bytes_);
  const std::size_t len = frame.length(max_frame_bytes_);
  std::memcpy(part.bytes.data() + off, p.bytes.data() + off, len);
  part.have[frame.index] = true;
  if (++part.received < frame.total) return std::nullopt;
  auto bytes = std::move(part.bytes);
  partial_.erase(it);
  return bytes;
}

}  // namespace drought::net
