#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "keys.hpp"
#include "label.hpp"
#include "manifest.hpp"
#include "merge.hpp"
#include "policy.hpp"
#include "safety.hpp"
#include "sim.hpp"
#include "stats.hpp"

namespace trafficforge {

// One end-to-end dataset build: simulate the scenario, gate on the safety
// sweep, fold in natural background traffic, anonymize, label against the
// roster, and publish the dataset plus reports and a replayable manifest
// into `out_dir`.  Raw (pre-anonymization) intermediates stay under
// `out_dir`/work and are never listed in the manifest.
struct RecreationOptions {
  std::string scenario_path;
  std::string natural_path;   // optional natural log merged under the attack
  std::string policy_path;    // optional; defaults to the built-in policy
  std::string rules_path;     // optional; defaults to the built-in ruleset
  std::string out_dir;
  MasterKey key;
  LogFormat format = LogFormat::ZeekTsv;  // ignored when a natural log sets it
  int threads = 1;
  std::optional<uint64_t> seed_override;
  std::optional<double> start_override;
  size_t hash_hex_len = 0;  // 0 keeps the policy's own length
};

struct RecreationResult {
  SimSummary sim_summary;
  SafetyReport safety;
  MergeReport merge;
  AnonymizeReport anonymize;
  LabelReport label_report;
  DatasetStats stats;
  Manifest manifest;

  std::string out_dir;
  std::string labeled_path;
  std::string truth_path;
  std::string roster_path;
  std::string manifest_path;
};

RecreationResult run_recreation(const RecreationOptions& options);

// Replays a published manifest: checks the key fingerprint and every input
// digest, re-runs the recreation with the recorded seed/start/format, and
// fails if any regenerated output digest differs from the recorded one.
RecreationResult run_from_manifest(const std::string& manifest_path,
                                   const MasterKey& key,
                                   const std::string& out_dir,
                                   int threads = 1);

// Throughput measurement for the anonymization path: one single-threaded
// pass and one at `threads` (0 -> one per hardware thread) over the same
// input, plus peak RSS of the process afterwards.
struct BenchReport {
  uint64_t records = 0;
  double single_seconds = 0.0;
  double single_rps = 0.0;
  int parallel_threads = 1;
  double parallel_seconds = 0.0;
  double parallel_rps = 0.0;
  long maxrss_kb = 0;

  std::string to_json() const;
};

BenchReport bench_anonymize(const std::string& in_path, const MasterKey& key,
                            const AnonymizationPolicy& policy, int threads = 0);

}  // namespace trafficforge
