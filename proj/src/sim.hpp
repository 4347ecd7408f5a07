#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "conn.hpp"
#include "scenario.hpp"

namespace trafficforge {

// Attack/benign lifecycle stages for generated traffic.
enum class Stage {
  Scan,
  Report,
  Download,
  C2,
  GeneratedBenign,
};

const char* stage_name(Stage stage);
bool stage_from_name(const std::string& name, Stage& out);

// Sealed ground truth emitted alongside every generated connection record.
struct TruthRecord {
  std::string uid;
  Stage stage = Stage::Scan;
  std::string actor;  // originator IP
  std::string note;
};

std::string serialize_truth(const TruthRecord& rec);
TruthRecord parse_truth(const std::string& line);

struct SimSummary {
  uint64_t rng_seed = 0;
  double duration = 0.0;
  double start_ts = 0.0;
  uint64_t pool_size = 0;
  uint64_t total_records = 0;
  int final_infected = 0;
  std::map<std::string, uint64_t> stage_counts;
  // (simulated seconds from start, infected count), one sample at t=0 and
  // one per infection.
  std::vector<std::pair<double, int>> infection_series;

  std::string to_json() const;
};

struct SimSinks {
  std::function<void(const ConnRecord&)> record;
  std::function<void(const TruthRecord&)> truth;
};

// Runs the full discrete-event simulation: telnet scanning from infected
// nodes, brute-force + report + loader-download infection chains, long-lived
// C2 keep-alives, and the human-plugin benign traffic from pool nodes.
// Single-threaded; (config, rng_seed) fully determines the emitted streams.
SimSummary run_simulation(const ScenarioConfig& config, const SimSinks& sinks);

// Convenience wrapper: writes <dir>/conn.log (or .json per format),
// <dir>/truth.jsonl and <dir>/summary.json.
struct SimulateResult {
  SimSummary summary;
  std::string conn_path;
  std::string truth_path;
  std::string summary_path;
};
SimulateResult simulate_to_dir(const ScenarioConfig& config,
                               const std::string& out_dir, LogFormat format);

}  // namespace trafficforge
