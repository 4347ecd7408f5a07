#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace trafficforge {

// Outcome of sweeping a generated stream for containment breaches.  Always
// returned (never thrown): the caller decides whether violations are fatal.
struct SafetyReport {
  uint64_t records_checked = 0;
  uint64_t violation_count = 0;
  std::vector<std::string> violations;  // first kMaxDetailed, human-readable

  static constexpr size_t kMaxDetailed = 100;

  bool ok() const { return violation_count == 0; }
  std::string to_json() const;
};

// Asserts over every record of a stream the simulator claims to have
// produced under `config`:
//   1. nothing ever targets excluded_ranges,
//   2. every attack-stage responder is inside allowed_scan_ranges or is one
//      of the infrastructure endpoints (benign traffic may only talk to the
//      synthetic external population),
//   3. every loader download originates from a vulnerable-pool node.
SafetyReport verify_safety(const std::string& conn_path,
                           const ScenarioConfig& config);

}  // namespace trafficforge
