#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conn.hpp"
#include "roster.hpp"

namespace trafficforge {

// The seven possible per-record labels.
inline const std::vector<std::string>& all_labels() {
  static const std::vector<std::string> labels = {
      "NATURAL", "SCAN",      "REPORT",   "DOWNLOAD",
      "C2",      "GENERATED_BENIGN", "UNLABELED"};
  return labels;
}

// One heuristic rule: all listed constraints must hold (empty list = no
// constraint on that dimension); the first matching rule in priority order
// assigns its label.
struct LabelRule {
  int priority = 0;
  std::string label;
  std::vector<Role> orig_roles;  // role of orig_h must be one of these
  std::vector<Role> resp_roles;  // role of resp_h must be one of these
  std::vector<Role> any_roles;   // either endpoint's role must be one
  std::vector<uint16_t> resp_ports;
  std::vector<Proto> protos;

  bool matches(const ConnRecord& rec, const Roster& roster) const;
};

class Ruleset {
 public:
  // The built-in heuristics, in priority order: natural first, then
  // C2/report/download by destination role and port, scanning by source
  // role and telnet ports, generated-benign for anything else touching the
  // experiment, and a catch-all UNLABELED.
  static Ruleset default_mirai(const Roster& roster);

  static Ruleset from_json(const std::string& text);
  static Ruleset load(const std::string& path);

  const std::string& label_of(const ConnRecord& rec, const Roster& roster) const;
  const std::vector<LabelRule>& rules() const { return rules_; }

  void add(LabelRule rule);  // keeps priority order; rejects duplicates

 private:
  std::vector<LabelRule> rules_;
};

struct LabelReport {
  uint64_t total_records = 0;
  std::map<std::string, uint64_t> label_counts;
  double coverage = 1.0;  // 1 - fraction UNLABELED; empty stream -> 1.0

  bool with_truth = false;
  uint64_t truth_records = 0;
  // truth stage (absent truth -> "NATURAL") -> assigned label -> count
  std::map<std::string, std::map<std::string, uint64_t>> confusion;
  std::map<std::string, double> precision;
  std::map<std::string, double> recall;
  uint64_t stage_errors = 0;  // generated records whose label != truth stage

  std::string to_json() const;
};

// Streams `in_path` to `out_path` with an "attack_stage" column appended
// (replaced in place when the input already carries one) and returns the
// report.  With a truth sidecar, every truth uid must appear in the stream
// or the run fails with truth_mismatch.
LabelReport label_file(const std::string& in_path, const std::string& out_path,
                       const Ruleset& rules, const Roster& roster,
                       const std::string& truth_path = "");

}  // namespace trafficforge
