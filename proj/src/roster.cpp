#include "roster.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "errors.hpp"
#include "prefix_anon.hpp"
#include "stream.hpp"

namespace trafficforge {

const char* role_name(Role role) {
  switch (role) {
    case Role::None:
      return "none";
    case Role::Pool:
      return "pool";
    case Role::Seed:
      return "seed";
    case Role::Report:
      return "report";
    case Role::Loader:
      return "loader";
    case Role::C2:
      return "c2";
    case Role::BenignSynthetic:
      return "benign_synthetic";
  }
  return "none";
}

bool role_from_name(const std::string& name, Role& out) {
  if (name == "none") out = Role::None;
  else if (name == "pool") out = Role::Pool;
  else if (name == "seed") out = Role::Seed;
  else if (name == "report") out = Role::Report;
  else if (name == "loader") out = Role::Loader;
  else if (name == "c2") out = Role::C2;
  else if (name == "benign_synthetic") out = Role::BenignSynthetic;
  else return false;
  return true;
}

void Roster::assign(const IpAddr& ip, Role role) {
  if (role == Role::None)
    throw roster_invalid("cannot assign the \"none\" role");
  auto [it, inserted] = roles_.emplace(ip, role);
  if (!inserted)
    throw roster_invalid(ip.to_string() + " appears in both \"" +
                         role_name(it->second) + "\" and \"" + role_name(role) +
                         "\"; role sets must be disjoint");
  members_[role].push_back(ip);
}

Role Roster::role_of(const IpAddr& ip) const {
  auto it = roles_.find(ip);
  return it == roles_.end() ? Role::None : it->second;
}

const std::vector<IpAddr>& Roster::members(Role role) const {
  static const std::vector<IpAddr> empty;
  auto it = members_.find(role);
  return it == members_.end() ? empty : it->second;
}

void Roster::validate() const {
  if (members(Role::Pool).empty() && members(Role::Seed).empty())
    throw roster_invalid("roster has no pool or seed addresses");
  for (Role r : {Role::Report, Role::Loader, Role::C2})
    if (members(r).size() > 1)
      throw roster_invalid(std::string("multiple \"") + role_name(r) +
                           "\" addresses");
}

Roster Roster::from_scenario(const ScenarioConfig& config, const KeySet* keys) {
  PrefixAnonymizer anonymizer(keys ? *keys : KeySet(MasterKey{}));
  auto transform = [&](const IpAddr& ip) {
    return keys ? anonymizer.anonymize(ip) : ip;
  };

  Roster roster;
  std::map<IpAddr, bool> seed_lookup;
  for (const IpAddr& seed : config.seed_bots) seed_lookup[seed] = true;

  for (const IpAddr& seed : config.seed_bots)
    roster.assign(transform(seed), Role::Seed);
  for (uint32_t addr : config.pool) {
    IpAddr ip = IpAddr::v4(addr);
    if (!seed_lookup.count(ip)) roster.assign(transform(ip), Role::Pool);
  }
  roster.assign(transform(config.report_server.ip), Role::Report);
  roster.assign(transform(config.loader.ip), Role::Loader);
  roster.assign(transform(config.c2_server.ip), Role::C2);
  for (uint32_t addr : config.benign_population())
    roster.assign(transform(IpAddr::v4(addr)), Role::BenignSynthetic);

  roster.report_port = config.report_server.port;
  roster.loader_port = config.loader.port;
  roster.c2_port = config.c2_server.port;
  roster.validate();
  return roster;
}

namespace {

nlohmann::ordered_json ips_to_json(const std::vector<IpAddr>& ips) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const IpAddr& ip : ips) arr.push_back(ip.to_string());
  return arr;
}

}  // namespace

std::string Roster::to_json() const {
  nlohmann::ordered_json j;
  j["pool_ips"] = ips_to_json(members(Role::Pool));
  j["seed_ips"] = ips_to_json(members(Role::Seed));
  nlohmann::ordered_json infra;
  auto endpoint = [&](Role role, uint16_t port) {
    nlohmann::ordered_json ep;
    const auto& ms = members(role);
    if (!ms.empty()) ep["ip"] = ms.front().to_string();
    ep["port"] = port;
    return ep;
  };
  infra["report_server"] = endpoint(Role::Report, report_port);
  infra["loader"] = endpoint(Role::Loader, loader_port);
  infra["c2_server"] = endpoint(Role::C2, c2_port);
  j["infrastructure"] = std::move(infra);
  j["benign_synthetic"] = ips_to_json(members(Role::BenignSynthetic));
  return j.dump(2) + "\n";
}

Roster Roster::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw roster_invalid(std::string("roster is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw roster_invalid("roster must be a JSON object");

  Roster roster;
  auto read_list = [&](const char* key, Role role) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_array())
      throw roster_invalid(std::string(key) + " must be a list of IP strings");
    for (const auto& entry : doc[key]) {
      if (!entry.is_string())
        throw roster_invalid(std::string(key) + " entries must be strings");
      roster.assign(IpAddr::parse(entry.get<std::string>()), role);
    }
  };
  read_list("pool_ips", Role::Pool);
  read_list("seed_ips", Role::Seed);
  read_list("benign_synthetic", Role::BenignSynthetic);

  if (doc.contains("infrastructure")) {
    const auto& infra = doc["infrastructure"];
    if (!infra.is_object())
      throw roster_invalid("infrastructure must be an object");
    auto read_endpoint = [&](const char* key, Role role, uint16_t& port) {
      if (!infra.contains(key)) return;
      const auto& ep = infra[key];
      if (!ep.is_object())
        throw roster_invalid(std::string("infrastructure.") + key +
                             " must be an object");
      if (ep.contains("ip")) {
        if (!ep["ip"].is_string())
          throw roster_invalid(std::string("infrastructure.") + key +
                               ".ip must be a string");
        roster.assign(IpAddr::parse(ep["ip"].get<std::string>()), role);
      }
      if (ep.contains("port")) {
        if (!ep["port"].is_number_integer() && !ep["port"].is_number_unsigned())
          throw roster_invalid(std::string("infrastructure.") + key +
                               ".port must be an integer");
        auto p = ep["port"].get<int64_t>();
        if (p < 1 || p > 65535)
          throw roster_invalid(std::string("infrastructure.") + key +
                               ".port out of range");
        port = static_cast<uint16_t>(p);
      }
    };
    read_endpoint("report_server", Role::Report, roster.report_port);
    read_endpoint("loader", Role::Loader, roster.loader_port);
    read_endpoint("c2_server", Role::C2, roster.c2_port);
  }
  return roster;
}

Roster Roster::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot open roster file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

void Roster::save(const std::string& path) const {
  LineWriter out(path, Compression::None);
  std::string json = to_json();
  if (!json.empty() && json.back() == '\n') json.pop_back();
  out.write_line(json);
  out.close();
}

}  // namespace trafficforge
