#pragma once

#include <cstdint>
#include <string>

namespace trafficforge {

struct MergeReport {
  uint64_t left_records = 0;
  uint64_t right_records = 0;
  uint64_t out_records = 0;
  uint64_t malformed_skipped = 0;
};

// Interleaves two individually time-sorted conn streams into one stream
// globally ordered by (ts, uid); at a full tie the left stream's record goes
// first.  Values are never rewritten — when an input already matches the
// output schema and format its lines are copied through verbatim; otherwise
// records are re-laid-out under the union schema (left's columns first) with
// unset fills.  Throws unsorted_input naming the offending file if either
// stream goes backwards in time.
MergeReport merge_files(const std::string& left_path,
                        const std::string& right_path,
                        const std::string& out_path);

}  // namespace trafficforge
