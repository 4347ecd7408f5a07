#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "stream.hpp"

namespace fs = std::filesystem;

namespace tftest {

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "tf-test-XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (::mkdtemp(buf.data()) == nullptr)
    throw std::runtime_error("mkdtemp failed for " + tmpl);
  path_ = buf.data();
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
  return (fs::path(path_) / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

namespace {

IpAddr random_v4(SimRng& rng) {
  return IpAddr::v4(static_cast<uint32_t>(rng.next_u64() >> 32));
}

IpAddr random_v6(SimRng& rng) {
  std::array<uint8_t, 16> bytes{};
  uint64_t hi = rng.next_u64(), lo = rng.next_u64();
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<uint8_t>(hi >> (8 * i));
    bytes[8 + i] = static_cast<uint8_t>(lo >> (8 * i));
  }
  return IpAddr::v6(bytes);
}

// unset / empty / one of `values`
std::optional<std::string> random_text(SimRng& rng,
                                       const std::vector<std::string>& values) {
  uint64_t pick = rng.below(10);
  if (pick < 2) return std::nullopt;
  if (pick < 3) return std::string();
  return values[rng.below(values.size())];
}

std::optional<int64_t> random_count(SimRng& rng) {
  if (rng.below(5) == 0) return std::nullopt;
  return static_cast<int64_t>(rng.below(5'000'000));
}

}  // namespace

ConnRecord random_record(SimRng& rng, bool allow_v6) {
  ConnRecord rec;
  rec.ts_us = static_cast<int64_t>(rng.below(4'000'000'000'000'000ull));
  rec.uid = make_uid(rng.next_u64(), rng.next_u64());
  bool v6 = allow_v6 && rng.below(10) < 3;
  rec.orig_h = v6 ? random_v6(rng) : random_v4(rng);
  rec.resp_h = v6 ? random_v6(rng) : random_v4(rng);
  rec.orig_p = static_cast<uint16_t>(rng.below(65536));
  rec.resp_p = static_cast<uint16_t>(rng.below(65536));
  rec.proto = static_cast<Proto>(rng.below(3));
  rec.service = random_text(rng, {"http", "ssl", "dns", "ssh", "ftp-data"});
  if (rng.below(5) != 0)
    rec.duration_us = static_cast<int64_t>(rng.below(86'400'000'000ull));
  rec.orig_bytes = random_count(rng);
  rec.resp_bytes = random_count(rng);
  rec.conn_state = random_text(rng, {"S0", "SF", "REJ", "RSTO", "OTH"});
  rec.history = random_text(rng, {"S", "Sr", "ShADadFf", "D", "^d"});
  rec.orig_pkts = random_count(rng);
  rec.resp_pkts = random_count(rng);
  return rec;
}

std::vector<uint32_t> scenario_addresses(const ScenarioConfig& config) {
  std::set<uint32_t> out(config.pool.begin(), config.pool.end());
  for (const IpAddr& seed : config.seed_bots) out.insert(seed.v4_value());
  for (uint32_t infra : config.infra_addrs()) out.insert(infra);
  for (uint32_t addr : config.benign_population()) out.insert(addr);
  return std::vector<uint32_t>(out.begin(), out.end());
}

uint64_t write_natural_log(const std::string& path, const NaturalSpec& spec) {
  SimRng rng(spec.seed ^ 0x6e61747572616cull);
  std::unordered_set<uint32_t> avoid(spec.avoid_v4.begin(),
                                     spec.avoid_v4.end());
  auto fresh_v4 = [&] {
    for (int tries = 0; tries < 10000; ++tries) {
      uint32_t value = static_cast<uint32_t>(rng.next_u64() >> 32);
      uint8_t top = static_cast<uint8_t>(value >> 24);
      if (top == 0 || top == 10 || top == 127 || top >= 224) continue;
      if (avoid.contains(value)) continue;
      return IpAddr::v4(value);
    }
    throw std::runtime_error("natural address sampling starved");
  };

  static const std::vector<std::pair<uint16_t, std::string>> kServices = {
      {80, "http"}, {443, "ssl"}, {53, "dns"}, {22, "ssh"},
      {25, "smtp"}, {123, "-"},   {8080, "http"}};

  ConnWriter writer(path, spec.format, compression_for_path(path),
                    LogSchema::default_conn());
  int64_t ts_us = static_cast<int64_t>(spec.start_ts * 1e6);
  double mean_gap = spec.count > 0 ? spec.duration / double(spec.count) : 1.0;
  for (uint64_t i = 0; i < spec.count; ++i) {
    ts_us += std::max<int64_t>(1, llround(rng.exponential(mean_gap) * 1e6));
    ConnRecord rec;
    rec.ts_us = ts_us;
    rec.uid = make_uid(rng.next_u64(), rng.next_u64());
    bool v6 = rng.uniform01() < spec.v6_fraction;
    if (v6) {
      rec.orig_h = random_v6(rng);
      rec.resp_h = random_v6(rng);
    } else {
      rec.orig_h = fresh_v4();
      rec.resp_h = fresh_v4();
    }
    const auto& [port, service] = kServices[rng.below(kServices.size())];
    rec.orig_p = static_cast<uint16_t>(1024 + rng.below(64512));
    rec.resp_p = port;
    rec.proto = (port == 53 || port == 123) ? Proto::Udp : Proto::Tcp;
    if (service != "-") rec.service = service;
    if (rng.below(20) != 0) {
      rec.duration_us = std::max<int64_t>(1, llround(rng.exponential(5.0) * 1e6));
      rec.orig_bytes = static_cast<int64_t>(100 + rng.below(20000));
      rec.resp_bytes = static_cast<int64_t>(100 + rng.below(200000));
      rec.conn_state = "SF";
      rec.history = "ShADadFf";
      rec.orig_pkts = 2 + *rec.orig_bytes / 1200;
      rec.resp_pkts = 2 + *rec.resp_bytes / 1200;
    } else {
      rec.conn_state = "S0";
      rec.history = "S";
      rec.orig_pkts = 1;
      rec.resp_pkts = 0;
    }
    writer.write(rec);
  }
  writer.close();
  return spec.count;
}

std::string small_scenario_json(uint64_t seed, double duration) {
  nlohmann::ordered_json j;
  j["rng_seed"] = seed;
  j["duration"] = duration;
  j["start_ts"] = 1600000000.0;
  j["vulnerable_pool"] = {"10.1.0.0/28"};
  j["seed_bots"] = {"10.1.0.1"};
  j["allowed_scan_ranges"] = {"10.1.0.0/24"};
  j["excluded_ranges"] = {"10.1.0.240/28"};
  j["infrastructure"] = {
      {"report_server", {{"ip", "192.0.2.10"}, {"port", 48101}}},
      {"loader", {{"ip", "192.0.2.20"}, {"http_port", 80}}},
      {"c2_server", {{"ip", "192.0.2.30"}, {"port", 23}}},
  };
  j["scan_rate"] = 2.0;
  j["dial_success_prob"] = 0.1;
  j["benign_external_count"] = 25;
  return j.dump(2) + "\n";
}

std::string random_scenario_json(uint64_t seed, double duration) {
  SimRng rng(seed * 0x9e3779b97f4a7c15ull + 1);
  int subnet = static_cast<int>(1 + rng.below(200));
  int pool_bits = static_cast<int>(26 + rng.below(3));  // /26../28: 64..16
  std::string base = "10." + std::to_string(subnet);

  nlohmann::ordered_json j;
  j["rng_seed"] = seed;
  j["duration"] = duration;
  j["start_ts"] = 1600000000.0 + double(rng.below(1000000));
  j["vulnerable_pool"] = {base + ".0.0/" + std::to_string(pool_bits)};
  j["seed_bots"] = {base + ".0.1"};
  j["allowed_scan_ranges"] = {base + ".0.0/22"};
  j["excluded_ranges"] = {base + ".3.0/26"};
  uint16_t report_port = rng.below(2) == 0 ? 48101 : 9000 + rng.below(1000);
  uint16_t loader_port = rng.below(2) == 0 ? 80 : 8080;
  uint16_t c2_port = rng.below(2) == 0 ? 23 : 6667;
  j["infrastructure"] = {
      {"report_server", {{"ip", "198.51.100.10"}, {"port", report_port}}},
      {"loader", {{"ip", "198.51.100.20"}, {"http_port", loader_port}}},
      {"c2_server", {{"ip", "198.51.100.30"}, {"port", c2_port}}},
  };
  j["scan_rate"] = 1.0 + rng.uniform01() * 3.0;
  j["dial_success_prob"] = 0.02 + rng.uniform01() * 0.18;
  j["benign_external_count"] = static_cast<int>(10 + rng.below(40));
  j["benign"] = {{"browse_rate", 0.7},
                 {"search_rate", 0.3},
                 {"delay_min", 10.0 + rng.uniform01() * 20.0},
                 {"delay_max", 60.0 + rng.uniform01() * 120.0}};
  return j.dump(2) + "\n";
}

std::vector<ConnRecord> read_records(const std::string& path) {
  std::vector<ConnRecord> out;
  ConnReader reader(path);
  ConnRecord rec;
  while (reader.next(rec)) out.push_back(rec);
  return out;
}

std::vector<std::string> read_labels(const std::string& path) {
  std::vector<std::string> out;
  ConnReader reader(path);
  ConnRecord rec;
  while (reader.next(rec)) {
    std::string label;
    for (const auto& [name, value] : rec.extras)
      if (name == "attack_stage") label = value;
    out.push_back(label);
  }
  return out;
}

std::string compare_trees(const std::string& a, const std::string& b) {
  auto relative_files = [](const std::string& root) {
    std::map<std::string, std::string> files;  // relative -> absolute
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      files[fs::path(entry.path()).lexically_relative(root).string()] =
          entry.path().string();
    }
    return files;
  };
  auto left = relative_files(a), right = relative_files(b);
  for (const auto& [rel, abs] : left) {
    auto it = right.find(rel);
    if (it == right.end()) return rel + " only exists in " + a;
    if (read_file(abs) != read_file(it->second))
      return rel + " differs between trees";
  }
  for (const auto& [rel, abs] : right)
    if (!left.contains(rel)) return rel + " only exists in " + b;
  return "";
}

}  // namespace tftest
