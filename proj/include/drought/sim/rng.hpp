#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace drought::sim {

// FNV-1a, 64-bit. Stable across platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view text);

// Counter-based random stream: draw n is a pure function of (seed, label, n),
// so streams of different entities never interact.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::string_view label);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  // Uniform on the closed range [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  double normal(double mean, double stddev);
  double exponential(double mean);
  bool bernoulli(double p);

  std::uint64_t draws() const { return counter_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::string label_;
};

}  // namespace drought::sim
