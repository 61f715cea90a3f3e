#pragma once

#include <cstdint>

#include "drought/sim/rng.hpp"

namespace drought::net {

enum class TransportMode : std::uint8_t { Unreliable, Reliable };

struct TransportOutcome {
  bool delivered = false;
  unsigned attempts = 0;  // transmissions made, including the first
};

// One loss draw per attempt from `rng`. Unreliable sends once. Reliable
// retries until an attempt survives, and throws DeliveryAbandoned when the
// first send plus `max_retries` retransmissions are all lost.
TransportOutcome transport_send(TransportMode mode, double loss_prob, unsigned max_retries,
                                sim::RngStream& rng);

}  // namespace drought::net
