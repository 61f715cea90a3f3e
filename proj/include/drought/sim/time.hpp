#pragma once

#include <compare>
#include <cstdint>
#include <limits>

namespace drought::sim {

using Seconds = std::uint64_t;

inline constexpr Seconds kSecondsPerDay = 86'400;
inline constexpr Seconds kSecondsPerYear = 365 * kSecondsPerDay;  // 31,536,000

// Virtual clock value in whole seconds since simulation start.
class SimTime {
 public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::uint64_t seconds) : seconds_(seconds) {}

  constexpr std::uint64_t seconds() const { return seconds_; }

  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::uint64_t>::max()); }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;

  friend constexpr SimTime operator+(SimTime t, Seconds d) { return SimTime(t.seconds_ + d); }
  friend constexpr Seconds operator-(SimTime a, SimTime b) { return a.seconds_ - b.seconds_; }
  constexpr SimTime& operator+=(Seconds d) {
    seconds_ += d;
    return *this;
  }

 private:
  std::uint64_t seconds_ = 0;
};

inline constexpr SimTime kDefaultHorizon{kSecondsPerYear};

}  // namespace drought::sim
