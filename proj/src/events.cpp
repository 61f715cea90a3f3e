#include "drought/events.hpp"

#include <array>

namespace drought {

std::string_view payload_tag(const Event& e) {
  static constexpr std::array<std::string_view, std::variant_size_v<Event>> kTags = {
      "wake", "sleep", "mac_try", "frame", "sink_handoff", "uplink", "uplink_ack", "retransmit"};
  return kTags[e.index()];
}

}  // namespace drought
