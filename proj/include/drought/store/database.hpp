#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "drought/store/record.hpp"

namespace drought::store {

struct SeriesPoint {
  SimTime timestamp;
  double value = 0.0;  // mean across the region's nodes at this timestamp
  std::size_t nodes = 0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

// Circular mean of compass bearings in degrees, in [0, 360). Returns 0 when
// the vectors cancel.
double circular_mean_deg(const std::vector<double>& bearings);

// Append-only record store keyed by (region, node, timestamp). Reads are
// const and safe to run concurrently once writing has finished.
class CentralDatabase {
 public:
  // False (and the duplicate counter bumps) when the key is already present.
  bool insert(const StoredRecord& record);

  void record_losses(std::uint64_t n) { losses_ += n; }

  std::size_t size() const { return records_.size(); }
  const std::vector<StoredRecord>& records() const { return records_; }
  std::uint64_t duplicates() const { return duplicates_; }
  std::uint64_t losses() const { return losses_; }
  bool contains(const RecordKey& key) const;

  std::vector<RegionId> regions() const;
  std::size_t region_count(RegionId region) const;
  // Records of one region ordered by (timestamp, node).
  std::vector<const StoredRecord*> region_records(RegionId region) const;
  std::optional<TimeWindow> span(RegionId region) const;

  // Calibrated `field` over [window.start, window.end), averaged across nodes
  // per timestamp (circular mean for wind direction), ordered by time.
  std::vector<SeriesPoint> query_window(RegionId region, Field field, TimeWindow window) const;

  // Full StoredRecord schema, one row per record in insertion order.
  void write_csv(std::ostream& out) const;
  static CentralDatabase read_csv(std::istream& in);

  // Per-region counts plus duplicate and loss counters.
  nlohmann::json summary() const;

 private:
  std::vector<StoredRecord> records_;
  std::unordered_set<std::uint64_t> keys_;
  std::map<RegionId, std::vector<std::size_t>> by_region_;  // sorted by (timestamp, node)
  std::uint64_t duplicates_ = 0;
  std::uint64_t losses_ = 0;
};

}  // namespace drought::store
