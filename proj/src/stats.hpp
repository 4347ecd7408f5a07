#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace trafficforge {

struct DatasetStats {
  uint64_t record_count = 0;
  uint64_t total_bytes = 0;  // sum of orig_bytes + resp_bytes where set
  uint64_t distinct_conns = 0;
  bool distinct_approx = false;  // true once the uid counter went streaming

  struct DayBucket {
    std::string day;  // "YYYY-MM-DD", UTC
    uint64_t records = 0;
    uint64_t bytes = 0;
  };
  std::vector<DayBucket> per_day;  // ascending by day

  bool has_labels = false;
  std::map<std::string, uint64_t> label_counts;

  std::string to_json() const;
  std::string to_table() const;
};

// Single streaming pass.  Distinct-connection counting is exact up to 65536
// uids, then hands off to a HyperLogLog sketch so memory stays flat on
// arbitrarily large inputs.
DatasetStats compute_stats(const std::string& in_path);

}  // namespace trafficforge
