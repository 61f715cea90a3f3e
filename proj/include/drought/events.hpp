#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "drought/net/packet.hpp"
#include "drought/sim/kernel.hpp"
#include "drought/store/record.hpp"

namespace drought {

struct WakeTimer {
  std::uint64_t cycle = 0;
};
struct SleepTimer {};
struct MacTry {};
struct FrameArrival {
  net::MacFrame frame;
};
// Sink to its local base station over the wired attachment.
struct SinkHandoff {
  net::DataMessage msg;
  NodeId last_hop = kNoNode;
};
struct UplinkSegment {
  std::uint64_t seq = 0;
  RegionId origin = 0;
  std::uint8_t hop = 0;  // index into the origin's backbone route
  store::StoredRecord record;
};
struct UplinkAck {
  std::uint64_t seq = 0;
};
struct RetransmitTimer {
  std::uint64_t seq = 0;
};

using Event = std::variant<WakeTimer, SleepTimer, MacTry, FrameArrival, SinkHandoff, UplinkSegment,
                           UplinkAck, RetransmitTimer>;

std::string_view payload_tag(const Event& e);

using Kernel = sim::Kernel<Event>;
using Delivery = sim::Delivery<Event>;

}  // namespace drought
