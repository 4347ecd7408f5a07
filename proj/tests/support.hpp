#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conn.hpp"
#include "rng.hpp"
#include "scenario.hpp"

// Shared fixtures for the test binaries: scratch directories, randomized
// records, synthetic natural background logs, and scenario builders.
namespace tftest {

using namespace trafficforge;

// Self-deleting scratch directory under the system temp root.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const;

 private:
  std::string path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

// Record with randomized field presence: optionals cycle through unset,
// empty (where a string) and set so codec tests exercise the sentinels.
ConnRecord random_record(SimRng& rng, bool allow_v6);

// Deterministic external background traffic: clients and servers drawn
// outside `avoid_v4`, some IPv6 pairs, strictly increasing timestamps.
struct NaturalSpec {
  uint64_t seed = 1;
  uint64_t count = 1000;
  double start_ts = 1600000000.0;
  double duration = 3600.0;
  LogFormat format = LogFormat::ZeekTsv;
  std::vector<uint32_t> avoid_v4;
  double v6_fraction = 0.05;
};
uint64_t write_natural_log(const std::string& path, const NaturalSpec& spec);

// Every IPv4 address a scenario can involve (pool, seeds, infrastructure,
// synthetic benign population) — what natural traffic must steer around.
std::vector<uint32_t> scenario_addresses(const ScenarioConfig& config);

// Fixed small topology: 16-node pool in 10.1.0.0/24, one seed, external
// infrastructure, an excluded /28.
std::string small_scenario_json(uint64_t seed, double duration);

// Randomized topology/parameters derived from `seed` (pool size, subnet,
// ports, rates all vary).  Always passes validation.
std::string random_scenario_json(uint64_t seed, double duration);

// All records of a conn log, in stream order.
std::vector<ConnRecord> read_records(const std::string& path);

// The attack_stage value of each record, in stream order ("" if absent).
std::vector<std::string> read_labels(const std::string& path);

// Byte-compare every regular file under two directory trees (same relative
// paths, same contents).  Returns a description of the first difference or
// "" when identical.
std::string compare_trees(const std::string& a, const std::string& b);

}  // namespace tftest
