#include "drought/net/transport.hpp"

#include <string>

#include "drought/errors.hpp"

namespace drought::net {

TransportOutcome transport_send(TransportMode mode, double loss_prob, unsigned max_retries,
                                sim::RngStream& rng) {
  TransportOutcome out;
  const unsigned limit = mode == TransportMode::Reliable ? max_retries + 1 : 1;
  while (out.attempts < limit) {
    ++out.attempts;
    if (!rng.bernoulli(loss_prob)) {
      out.delivered = true;
      return out;
    }
  }
  if (mode == TransportMode::Reliable) {
    throw DeliveryAbandoned("no acknowledgement after " + std::to_string(out.attempts) + " attempts");
  }
  return out;
}

}  // namespace drought::net
