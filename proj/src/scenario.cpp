#include "scenario.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "errors.hpp"
#include "rng.hpp"

namespace trafficforge {

namespace {

Ipv4RangeSet parse_range_list(const nlohmann::json& arr, const char* what) {
  if (!arr.is_array())
    throw config_violation(std::string(what) + " must be a list of CIDR strings");
  Ipv4RangeSet set;
  for (const auto& entry : arr) {
    if (!entry.is_string())
      throw config_violation(std::string(what) + " entries must be strings");
    Cidr cidr = Cidr::parse(entry.get<std::string>());
    if (!cidr.base.is_v4())
      throw config_violation(std::string(what) +
                             ": only IPv4 ranges are simulated (got " +
                             cidr.to_string() + ")");
    set.add(cidr);
  }
  set.normalize();
  return set;
}

double get_number(const nlohmann::json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number())
    throw config_violation(std::string(key) + " must be a number");
  return it->get<double>();
}

InfraEndpoint parse_endpoint(const nlohmann::json& obj, const char* name,
                             const char* port_key, uint16_t default_port) {
  auto it = obj.find(name);
  if (it == obj.end())
    throw config_violation(std::string("infrastructure.") + name + " is required");
  const auto& ep = *it;
  if (!ep.is_object() || !ep.contains("ip") || !ep["ip"].is_string())
    throw config_violation(std::string("infrastructure.") + name +
                           " must be an object with an \"ip\" string");
  InfraEndpoint out;
  out.ip = IpAddr::parse(ep["ip"].get<std::string>());
  if (!out.ip.is_v4())
    throw config_violation(std::string("infrastructure.") + name +
                           " must be an IPv4 address");
  double port = get_number(ep, port_key, default_port);
  if (port < 1 || port > 65535 || port != static_cast<uint16_t>(port))
    throw config_violation(std::string("infrastructure.") + name +
                           ": invalid port");
  out.port = static_cast<uint16_t>(port);
  return out;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_violation(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw config_violation("scenario must be a JSON object");

  ScenarioConfig cfg;
  if (doc.contains("rng_seed")) {
    if (!doc["rng_seed"].is_number_unsigned() && !doc["rng_seed"].is_number_integer())
      throw config_violation("rng_seed must be an integer");
    cfg.rng_seed = doc["rng_seed"].get<uint64_t>();
  }
  cfg.duration = get_number(doc, "duration", 0.0);
  cfg.start_ts = get_number(doc, "start_ts", cfg.start_ts);

  if (!doc.contains("vulnerable_pool"))
    throw config_violation("vulnerable_pool is required");
  cfg.pool_set = parse_range_list(doc["vulnerable_pool"], "vulnerable_pool");
  if (cfg.pool_set.size() > kPoolCap)
    throw config_violation("vulnerable_pool expands to " +
                           std::to_string(cfg.pool_set.size()) +
                           " addresses (cap " + std::to_string(kPoolCap) + ")");
  {
    auto addrs = cfg.pool_set.to_addresses(kPoolCap);
    cfg.pool.assign(addrs.begin(), addrs.end());
  }

  if (!doc.contains("allowed_scan_ranges"))
    throw config_violation("allowed_scan_ranges is required");
  cfg.allowed = parse_range_list(doc["allowed_scan_ranges"], "allowed_scan_ranges");
  if (doc.contains("excluded_ranges"))
    cfg.excluded = parse_range_list(doc["excluded_ranges"], "excluded_ranges");

  if (doc.contains("seed_bots")) {
    if (!doc["seed_bots"].is_array())
      throw config_violation("seed_bots must be a list of IP strings");
    for (const auto& entry : doc["seed_bots"]) {
      if (!entry.is_string())
        throw config_violation("seed_bots entries must be strings");
      IpAddr ip = IpAddr::parse(entry.get<std::string>());
      if (!ip.is_v4())
        throw config_violation("seed_bots must be IPv4 addresses");
      cfg.seed_bots.push_back(ip);
    }
  }

  if (!doc.contains("infrastructure") || !doc["infrastructure"].is_object())
    throw config_violation("infrastructure object is required");
  const auto& infra = doc["infrastructure"];
  cfg.report_server = parse_endpoint(infra, "report_server", "port", 48101);
  cfg.loader = parse_endpoint(infra, "loader", "http_port", 80);
  cfg.c2_server = parse_endpoint(infra, "c2_server", "port", 23);
  if (infra.contains("external")) {
    if (!infra["external"].is_boolean())
      throw config_violation("infrastructure.external must be a boolean");
    cfg.infra_external = infra["external"].get<bool>();
  }

  cfg.scan_rate = get_number(doc, "scan_rate", cfg.scan_rate);
  cfg.dial_success_prob =
      get_number(doc, "dial_success_prob", cfg.dial_success_prob);

  if (doc.contains("credential_spec")) {
    const auto& cs = doc["credential_spec"];
    if (!cs.is_object()) throw config_violation("credential_spec must be an object");
    cfg.username_len = static_cast<int>(get_number(cs, "username_len", 20));
    cfg.password_len = static_cast<int>(get_number(cs, "password_len", 25));
    if (cs.contains("alphabet")) {
      if (!cs["alphabet"].is_string())
        throw config_violation("credential_spec.alphabet must be a string");
      cfg.alphabet = cs["alphabet"].get<std::string>();
    }
  }

  if (doc.contains("benign")) {
    const auto& b = doc["benign"];
    if (!b.is_object()) throw config_violation("benign must be an object");
    cfg.browse_rate = get_number(b, "browse_rate", cfg.browse_rate);
    cfg.search_rate = get_number(b, "search_rate", cfg.search_rate);
    cfg.delay_min = get_number(b, "delay_min", cfg.delay_min);
    cfg.delay_max = get_number(b, "delay_max", cfg.delay_max);
  }
  cfg.benign_external_count = static_cast<int>(
      get_number(doc, "benign_external_count", cfg.benign_external_count));

  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot open scenario file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

void ScenarioConfig::validate() const {
  if (duration < 0) throw config_violation("duration must be >= 0");
  if (scan_rate <= 0) throw config_violation("scan_rate must be > 0");
  if (dial_success_prob < 0 || dial_success_prob > 1)
    throw config_violation("dial_success_prob must be in [0, 1]");
  if (pool.empty()) throw config_violation("vulnerable_pool must be non-empty");

  for (uint32_t addr : pool) {
    if (!allowed.contains_u32(addr))
      throw config_violation("pool address " + IpAddr::v4(addr).to_string() +
                             " is outside allowed_scan_ranges");
    if (excluded.contains_u32(addr))
      throw config_violation("pool address " + IpAddr::v4(addr).to_string() +
                             " is inside excluded_ranges (sets must be disjoint)");
  }
  for (const IpAddr& seed : seed_bots)
    if (!pool_set.contains(seed))
      throw config_violation("seed bot " + seed.to_string() +
                             " is outside vulnerable_pool");

  const uint32_t infra[3] = {report_server.ip.v4_value(), loader.ip.v4_value(),
                             c2_server.ip.v4_value()};
  const char* names[3] = {"report_server", "loader", "c2_server"};
  for (int i = 0; i < 3; ++i) {
    if (pool_set.contains_u32(infra[i]))
      throw config_violation(std::string(names[i]) +
                             " is inside vulnerable_pool");
    for (int j = i + 1; j < 3; ++j)
      if (infra[i] == infra[j])
        throw config_violation(std::string(names[i]) + " and " + names[j] +
                               " share one IP; infrastructure must be distinct");
  }

  if (username_len < 1 || password_len < 1)
    throw config_violation("credential lengths must be >= 1");
  if (alphabet != "alphanumeric")
    throw config_violation("credential_spec.alphabet: only \"alphanumeric\" is supported");
  if (browse_rate < 0 || search_rate < 0)
    throw config_violation("benign rates must be >= 0");
  if (delay_min < 0 || delay_max < delay_min)
    throw config_violation("benign delay bounds must satisfy 0 <= min <= max");
  if (benign_external_count < 0)
    throw config_violation("benign_external_count must be >= 0");

  // The scanner resamples around infrastructure and itself, so there must be
  // something else to hit.  Exact counting only matters for tiny spaces;
  // otherwise excluded.size() is already an upper bound on the overlap.
  if (allowed.size() <= excluded.size() + 4) {
    uint64_t scannable = 0;
    for (uint64_t i = 0; i < allowed.size(); ++i) {
      uint32_t addr = allowed.at(i);
      if (!excluded.contains_u32(addr) && !is_infra(addr)) ++scannable;
    }
    if (scannable <= 1)
      throw config_violation(
          "allowed_scan_ranges minus excluded_ranges leaves nothing to scan");
  }
}

bool ScenarioConfig::is_infra(uint32_t addr) const {
  return addr == report_server.ip.v4_value() || addr == loader.ip.v4_value() ||
         addr == c2_server.ip.v4_value();
}

std::vector<uint32_t> ScenarioConfig::infra_addrs() const {
  return {report_server.ip.v4_value(), loader.ip.v4_value(),
          c2_server.ip.v4_value()};
}

std::vector<uint32_t> ScenarioConfig::benign_population() const {
  // Independent sub-stream so population membership never shifts with
  // simulation changes: only the seed and the scenario ranges matter.
  SimRng rng(rng_seed ^ 0x62656e69676e5f31ull);
  std::vector<uint32_t> population;
  population.reserve(static_cast<size_t>(benign_external_count));
  std::unordered_set<uint32_t> seen;
  long guard = 0;
  while (population.size() < static_cast<size_t>(benign_external_count)) {
    if (++guard > static_cast<long>(benign_external_count) * 1000 + 10000)
      throw config_violation(
          "cannot draw a benign external population disjoint from the "
          "scenario ranges");
    auto addr = static_cast<uint32_t>(rng.next_u64() >> 32);
    uint8_t top = static_cast<uint8_t>(addr >> 24);
    if (top == 0 || top == 127 || top >= 224) continue;  // loopback/multicast/etc
    if (allowed.contains_u32(addr) || excluded.contains_u32(addr)) continue;
    if (pool_set.contains_u32(addr) || is_infra(addr)) continue;
    if (!seen.insert(addr).second) continue;
    population.push_back(addr);
  }
  return population;
}

}  // namespace trafficforge
