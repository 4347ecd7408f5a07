#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ip.hpp"

namespace trafficforge {

struct InfraEndpoint {
  IpAddr ip;
  uint16_t port = 0;

  bool operator==(const InfraEndpoint&) const = default;
};

// Everything that defines one simulation run.  A (config, seed) pair fully
// determines the emitted traffic, and every derived set (expanded pool,
// synthetic benign population) is reconstructible from the config alone, so
// rosters and replays never depend on simulator state.
struct ScenarioConfig {
  uint64_t rng_seed = 1;
  double duration = 0.0;            // simulated seconds
  double start_ts = 1600000000.0;   // epoch seconds of simulated t=0

  std::vector<IpAddr> seed_bots;
  std::vector<uint32_t> pool;       // expanded vulnerable pool, sorted
  Ipv4RangeSet pool_set;
  Ipv4RangeSet allowed;             // ranges the scanner may target
  Ipv4RangeSet excluded;            // never targeted; beats allowed

  InfraEndpoint report_server;      // default port 48101
  InfraEndpoint loader;             // default port 80
  InfraEndpoint c2_server;          // default port 23
  bool infra_external = true;

  double scan_rate = 1.0;           // probes/second per infected node
  double dial_success_prob = 0.05;  // P(refused vs silent) off-pool

  int username_len = 20;
  int password_len = 25;
  std::string alphabet = "alphanumeric";

  double browse_rate = 0.7;
  double search_rate = 0.3;
  double delay_min = 30.0;
  double delay_max = 300.0;
  int benign_external_count = 200;

  // The vulnerable pool may not expand beyond this many addresses.
  static constexpr uint64_t kPoolCap = 65536;

  static ScenarioConfig from_json(const std::string& text);
  static ScenarioConfig load(const std::string& path);

  // Throws config_violation naming the broken rule.
  void validate() const;

  bool in_pool(uint32_t addr) const { return pool_set.contains_u32(addr); }
  bool is_infra(uint32_t addr) const;
  std::vector<uint32_t> infra_addrs() const;

  // Synthetic external hosts that benign traffic talks to: a fixed-size set
  // drawn deterministically from the seed, disjoint from every scenario
  // range, so it can be rebuilt for rosters without rerunning anything.
  std::vector<uint32_t> benign_population() const;
};

}  // namespace trafficforge
