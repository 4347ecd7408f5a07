#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ip.hpp"
#include "keys.hpp"
#include "scenario.hpp"

namespace trafficforge {

enum class Role {
  None,  // not in the roster at all
  Pool,
  Seed,
  Report,
  Loader,
  C2,
  BenignSynthetic,
};

const char* role_name(Role role);
bool role_from_name(const std::string& name, Role& out);

// The record of experiment IPs that labeling keys off: vulnerable pool,
// seed bots, infrastructure endpoints (with the ports they served), and the
// synthetic benign-destination population.  Role sets are pairwise disjoint;
// when built with a KeySet every address is stored anonymized so labeling
// runs directly on anonymized logs.
class Roster {
 public:
  void assign(const IpAddr& ip, Role role);  // throws roster_invalid on clash
  Role role_of(const IpAddr& ip) const;
  bool in_pool_or_seed(const IpAddr& ip) const {
    Role r = role_of(ip);
    return r == Role::Pool || r == Role::Seed;
  }

  const std::vector<IpAddr>& members(Role role) const;
  uint64_t size() const { return roles_.size(); }

  uint16_t report_port = 48101;
  uint16_t loader_port = 80;
  uint16_t c2_port = 23;

  // Pool must be non-empty for attack labeling; infrastructure roles hold at
  // most one address each.
  void validate() const;

  // keys == nullptr -> raw scenario addresses; otherwise each address is
  // passed through the prefix-preserving anonymizer first.
  static Roster from_scenario(const ScenarioConfig& config, const KeySet* keys);

  static Roster from_json(const std::string& text);
  static Roster load(const std::string& path);
  std::string to_json() const;
  void save(const std::string& path) const;

 private:
  std::map<IpAddr, Role> roles_;
  std::map<Role, std::vector<IpAddr>> members_;
};

}  // namespace trafficforge
