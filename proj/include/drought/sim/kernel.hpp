#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "drought/errors.hpp"
#include "drought/sim/entity.hpp"
#include "drought/sim/time.hpp"

namespace drought::sim {

template <typename Payload>
struct Delivery {
  SimTime at;
  std::uint64_t seq;
  EntityId from;
  EntityId to;
  const Payload& payload;
};

// Discrete-event engine. Events fire in strict (fire_at, seq) order where seq
// is a global counter assigned at scheduling time. Payload must provide a
// `payload_tag(const Payload&)` overload (found by ADL) for event traces.
template <typename Payload>
class Kernel {
 public:
  using Handler = std::function<void(const Delivery<Payload>&)>;

  Kernel() = default;
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  void add_entity(EntityId id, Handler handler) {
    auto& slots = handlers_[static_cast<std::size_t>(id.kind)];
    if (slots.size() <= id.index) slots.resize(id.index + 1);
    if (slots[id.index]) throw Error("entity registered twice: " + to_string(id));
    slots[id.index] = std::move(handler);
  }

  bool has_entity(EntityId id) const {
    const auto& slots = handlers_[static_cast<std::size_t>(id.kind)];
    return id.index < slots.size() && static_cast<bool>(slots[id.index]);
  }

  // Timer or self message: delivered to `target` with from == target.
  std::uint64_t schedule(SimTime fire_at, EntityId target, Payload payload) {
    return push(fire_at, target, target, std::move(payload));
  }

  std::uint64_t send_delayed(EntityId from, EntityId to, Payload payload, Seconds delay) {
    if (!has_entity(from)) throw UnknownEntity("unknown sender " + to_string(from));
    return push(now_ + delay, from, to, std::move(payload));
  }

  // Processes every queued event with fire_at <= horizon. Returns the number
  // of events processed by this call.
  std::uint64_t run_until(SimTime horizon) {
    std::uint64_t processed = 0;
    while (!heap_.empty() && heap_.top().fire_at <= horizon) {
      const Key key = heap_.top();
      heap_.pop();
      Slot slot = std::move(*slots_[key.slot]);
      slots_[key.slot].reset();
      free_.push_back(key.slot);

      now_ = key.fire_at;
      ++processed;
      ++total_processed_;
      if (trace_ != nullptr) {
        *trace_ << now_.seconds() << '\t' << key.seq << '\t' << to_string(slot.to) << '\t'
                << payload_tag(slot.payload) << '\n';
      }
      const Delivery<Payload> delivery{key.fire_at, key.seq, slot.from, slot.to, slot.payload};
      handlers_[static_cast<std::size_t>(slot.to.kind)][slot.to.index](delivery);
    }
    return processed;
  }

  SimTime now() const { return now_; }
  std::size_t pending() const { return heap_.size(); }
  std::uint64_t processed() const { return total_processed_; }
  std::uint64_t scheduled() const { return next_seq_; }

  std::optional<SimTime> next_event_time() const {
    if (heap_.empty()) return std::nullopt;
    return heap_.top().fire_at;
  }

  // One line per processed event: time<TAB>seq<TAB>kind:index<TAB>tag.
  void set_trace(std::ostream* out) { trace_ = out; }

 private:
  struct Key {
    SimTime fire_at;
    std::uint64_t seq;
    std::uint32_t slot;
  };
  struct Later {
    bool operator()(const Key& a, const Key& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };
  struct Slot {
    EntityId from;
    EntityId to;
    Payload payload;
  };

  std::uint64_t push(SimTime fire_at, EntityId from, EntityId to, Payload payload) {
    if (fire_at < now_) {
      throw SchedulingInPast("event for " + to_string(to) + " at t=" +
                             std::to_string(fire_at.seconds()) + " is before clock " +
                             std::to_string(now_.seconds()));
    }
    if (!has_entity(to)) throw UnknownEntity("unknown target " + to_string(to));
    std::uint32_t index;
    if (!free_.empty()) {
      index = free_.back();
      free_.pop_back();
      slots_[index].emplace(Slot{from, to, std::move(payload)});
    } else {
      index = static_cast<std::uint32_t>(slots_.size());
      slots_.emplace_back(Slot{from, to, std::move(payload)});
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push(Key{fire_at, seq, index});
    return seq;
  }

  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::uint64_t total_processed_ = 0;
  std::priority_queue<Key, std::vector<Key>, Later> heap_;
  std::vector<std::optional<Slot>> slots_;
  std::vector<std::uint32_t> free_;
  std::array<std::vector<Handler>, kEntityKindCount> handlers_;
  std::ostream* trace_ = nullptr;
};

}  // namespace drought::sim
