#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "conn.hpp"
#include "errors.hpp"
#include "ip.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "sim.hpp"
#include "support.hpp"

using namespace trafficforge;
using tftest::TempDir;

namespace {

struct SimCapture {
  std::vector<ConnRecord> records;
  std::vector<TruthRecord> truths;
  SimSummary summary;
};

SimCapture run_capture(const ScenarioConfig& config) {
  SimCapture cap;
  SimSinks sinks;
  sinks.record = [&](const ConnRecord& r) { cap.records.push_back(r); };
  sinks.truth = [&](const TruthRecord& t) { cap.truths.push_back(t); };
  cap.summary = run_simulation(config, sinks);
  return cap;
}

// Serialize both streams to one string; byte-equality of two runs is the
// strongest determinism statement available without touching the filesystem.
std::string run_serialized(const ScenarioConfig& config) {
  LogSchema schema = LogSchema::default_conn();
  auto layout = schema.layout();
  std::string out;
  SimSinks sinks;
  sinks.record = [&](const ConnRecord& r) {
    out += serialize_conn_tsv(r, schema, layout);
    out += '\n';
  };
  sinks.truth = [&](const TruthRecord& t) {
    out += serialize_truth(t);
    out += '\n';
  };
  run_simulation(config, sinks);
  return out;
}

ScenarioConfig small_config(uint64_t seed, double duration) {
  return ScenarioConfig::from_json(tftest::small_scenario_json(seed, duration));
}

}  // namespace

TEST_CASE("rng streams are deterministic and well-distributed") {
  SimRng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());

  SimRng rng(7);
  for (int i = 0; i < 2000; ++i) {
    uint64_t v = rng.below(10);
    CHECK(v < 10);
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(rng.below(1) == 0);
  CHECK(rng.below(0) == 0);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(rng.chance(0.0));
    CHECK(rng.chance(1.0));
  }

  // Sample means of the shaped draws sit near their parameters.
  double exp_sum = 0, norm_sum = 0, norm_sq = 0;
  const int kN = 20000;
  for (int i = 0; i < kN; ++i) {
    double e = rng.exponential(2.0);
    CHECK(e >= 0.0);
    exp_sum += e;
    double n = rng.normal();
    norm_sum += n;
    norm_sq += n * n;
    CHECK(rng.lognormal(0.0, 0.5) > 0.0);
  }
  CHECK(exp_sum / kN == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::abs(norm_sum / kN) < 0.02);
  CHECK(norm_sq / kN == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("scenario json round-trips fields and applies defaults") {
  ScenarioConfig cfg = small_config(99, 600.0);
  CHECK(cfg.rng_seed == 99);
  CHECK(cfg.duration == 600.0);
  CHECK(cfg.start_ts == 1600000000.0);
  CHECK(cfg.pool.size() == 16);
  CHECK(std::is_sorted(cfg.pool.begin(), cfg.pool.end()));
  REQUIRE(cfg.seed_bots.size() == 1);
  CHECK(cfg.seed_bots[0].to_string() == "10.1.0.1");
  CHECK(cfg.report_server.ip.to_string() == "192.0.2.10");
  CHECK(cfg.report_server.port == 48101);
  CHECK(cfg.loader.port == 80);
  CHECK(cfg.c2_server.port == 23);
  CHECK(cfg.scan_rate == 2.0);
  CHECK(cfg.dial_success_prob == 0.1);
  CHECK(cfg.benign_external_count == 25);
  CHECK(cfg.in_pool(IpAddr::parse("10.1.0.5").v4_value()));
  CHECK_FALSE(cfg.in_pool(IpAddr::parse("10.1.1.5").v4_value()));
  CHECK(cfg.is_infra(IpAddr::parse("192.0.2.20").v4_value()));
  cfg.validate();

  // Minimal config: everything optional falls back to documented defaults.
  ScenarioConfig min = ScenarioConfig::from_json(R"({
    "vulnerable_pool": ["10.9.0.0/30"],
    "allowed_scan_ranges": ["10.9.0.0/24"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })");
  CHECK(min.rng_seed == 1);
  CHECK(min.duration == 0.0);
  CHECK(min.start_ts == 1600000000.0);
  CHECK(min.report_server.port == 48101);
  CHECK(min.loader.port == 80);
  CHECK(min.c2_server.port == 23);
  CHECK(min.scan_rate == 1.0);
  CHECK(min.dial_success_prob == 0.05);
  CHECK(min.username_len == 20);
  CHECK(min.password_len == 25);
  CHECK(min.alphabet == "alphanumeric");
  CHECK(min.browse_rate == 0.7);
  CHECK(min.search_rate == 0.3);
  CHECK(min.delay_min == 30.0);
  CHECK(min.delay_max == 300.0);
  CHECK(min.benign_external_count == 200);
  CHECK(min.seed_bots.empty());
  min.validate();
}

TEST_CASE("scenario validation names the broken rule") {
  auto reject = [](const std::string& json, const char* needle) {
    CHECK_THROWS_WITH_AS(
        [&] {
          ScenarioConfig c = ScenarioConfig::from_json(json);
          c.validate();
        }(),
        doctest::Contains(needle), Error);
  };

  std::string base = R"({
    "vulnerable_pool": ["10.9.0.0/28"],
    "allowed_scan_ranges": ["10.9.0.0/24"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })";

  reject("{not json", "not valid JSON");
  reject("[]", "JSON object");
  reject(R"({"allowed_scan_ranges": ["10.0.0.0/24"]})", "vulnerable_pool is required");
  reject(R"({"vulnerable_pool": ["10.0.0.0/24"]})", "allowed_scan_ranges is required");
  reject(R"({"vulnerable_pool": ["10.0.0.0/24"],
             "allowed_scan_ranges": ["10.0.0.0/24"]})",
         "infrastructure object is required");
  // Pool outside the allowed ranges.
  reject(R"({
    "vulnerable_pool": ["10.8.0.0/28"],
    "allowed_scan_ranges": ["10.9.0.0/24"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })",
         "outside allowed_scan_ranges");
  // Pool overlapping the excluded carve-out.
  reject(R"({
    "vulnerable_pool": ["10.9.0.0/28"],
    "allowed_scan_ranges": ["10.9.0.0/24"],
    "excluded_ranges": ["10.9.0.0/30"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })",
         "inside excluded_ranges");
  // Seed bot outside the pool.
  reject(R"({
    "vulnerable_pool": ["10.9.0.0/28"],
    "allowed_scan_ranges": ["10.9.0.0/24"],
    "seed_bots": ["10.9.0.200"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })",
         "outside vulnerable_pool");
  // Infrastructure planted inside the pool.
  reject(R"({
    "vulnerable_pool": ["10.9.0.0/28"],
    "allowed_scan_ranges": ["10.9.0.0/24"],
    "infrastructure": {
      "report_server": {"ip": "10.9.0.2"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })",
         "inside vulnerable_pool");
  // Two infrastructure roles sharing one address.
  reject(R"({
    "vulnerable_pool": ["10.9.0.0/28"],
    "allowed_scan_ranges": ["10.9.0.0/24"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.1"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })",
         "share one IP");

  auto tweak = [&](const char* key, const nlohmann::json& value) {
    nlohmann::json j = nlohmann::json::parse(base);
    j[key] = value;
    return j.dump();
  };
  reject(tweak("dial_success_prob", 1.5), "dial_success_prob");
  reject(tweak("scan_rate", 0.0), "scan_rate");
  reject(tweak("duration", -5.0), "duration");
  reject(tweak("credential_spec",
               nlohmann::json{{"alphabet", "emoji"}}),
         "alphanumeric");
  reject(tweak("credential_spec", nlohmann::json{{"username_len", 0}}),
         "credential lengths");
  reject(tweak("benign", nlohmann::json{{"delay_min", 50.0}, {"delay_max", 10.0}}),
         "delay bounds");
  reject(tweak("benign_external_count", -1), "benign_external_count");
  reject(tweak("rng_seed", "abc"), "rng_seed");
  // A pool bigger than the expansion cap is refused outright.
  reject(R"({
    "vulnerable_pool": ["10.0.0.0/14"],
    "allowed_scan_ranges": ["10.0.0.0/8"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })",
         "expands to");
  // Allowed minus excluded leaves nothing worth scanning.
  reject(R"({
    "vulnerable_pool": ["10.9.0.0/32"],
    "allowed_scan_ranges": ["10.9.0.0/32"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.1"},
      "loader": {"ip": "192.0.2.2"},
      "c2_server": {"ip": "192.0.2.3"}
    }
  })",
         "nothing to scan");
}

TEST_CASE("benign population is stable, sized, and disjoint") {
  ScenarioConfig cfg = small_config(5, 600.0);
  auto pop1 = cfg.benign_population();
  auto pop2 = cfg.benign_population();
  CHECK(pop1 == pop2);
  CHECK(pop1.size() == 25);

  ScenarioConfig other = small_config(6, 600.0);
  CHECK(other.benign_population() != pop1);

  std::unordered_set<uint32_t> seen;
  for (uint32_t addr : pop1) {
    CHECK(seen.insert(addr).second);
    CHECK_FALSE(cfg.allowed.contains_u32(addr));
    CHECK_FALSE(cfg.excluded.contains_u32(addr));
    CHECK_FALSE(cfg.in_pool(addr));
    CHECK_FALSE(cfg.is_infra(addr));
    uint8_t top = uint8_t(addr >> 24);
    CHECK(top != 0);
    CHECK(top != 127);
    CHECK(top < 224);
  }
}

TEST_CASE("simulation is a pure function of config and seed") {
  ScenarioConfig cfg = small_config(321, 600.0);
  std::string first = run_serialized(cfg);
  std::string second = run_serialized(cfg);
  CHECK(first == second);
  CHECK(first.size() > 10000);

  ScenarioConfig reseeded = small_config(322, 600.0);
  CHECK(run_serialized(reseeded) != first);
}

TEST_CASE("record and truth streams stay aligned") {
  SimCapture cap = run_capture(small_config(11, 600.0));
  REQUIRE(cap.records.size() == cap.truths.size());
  CHECK(cap.summary.total_records == cap.records.size());
  CHECK(cap.summary.pool_size == 16);

  std::set<std::string> uids;
  for (size_t i = 0; i < cap.records.size(); ++i) {
    CHECK(cap.truths[i].uid == cap.records[i].uid);
    CHECK(cap.truths[i].actor == cap.records[i].orig_h.to_string());
    uids.insert(cap.records[i].uid);
  }
  // uids are unique across the run.
  CHECK(uids.size() == cap.records.size());

  // Stage tallies in the summary match the truth stream.
  std::map<std::string, uint64_t> tally;
  for (const auto& t : cap.truths) ++tally[stage_name(t.stage)];
  CHECK(tally == cap.summary.stage_counts);

  // The stream is emitted in time order.
  for (size_t i = 1; i < cap.records.size(); ++i)
    CHECK(cap.records[i].ts_us >= cap.records[i - 1].ts_us);
  // ...and inside the simulated window.
  int64_t start_us = 1600000000000000;
  int64_t end_us = start_us + 600000000;
  CHECK(cap.records.front().ts_us >= start_us);
  CHECK(cap.records.back().ts_us < end_us);
}

TEST_CASE("the infection lifecycle unfolds in order per victim") {
  ScenarioConfig cfg = small_config(17, 600.0);
  SimCapture cap = run_capture(cfg);
  REQUIRE(cap.summary.final_infected > 1);  // the seed alone would be 1

  uint32_t loader = cfg.loader.ip.v4_value();
  uint32_t report = cfg.report_server.ip.v4_value();
  uint32_t c2 = cfg.c2_server.ip.v4_value();
  uint32_t seed_bot = cfg.seed_bots[0].v4_value();

  // Collect the downloads; each one marks an infection.
  std::vector<size_t> downloads;
  for (size_t i = 0; i < cap.records.size(); ++i)
    if (cap.truths[i].stage == Stage::Download) downloads.push_back(i);
  CHECK(downloads.size() == size_t(cap.summary.final_infected - 1));

  for (size_t di : downloads) {
    uint32_t victim = cap.records[di].orig_h.v4_value();
    CHECK(cfg.in_pool(victim));
    CHECK(victim != seed_bot);
    CHECK(cap.records[di].resp_h.v4_value() == loader);
    CHECK(cap.records[di].resp_p == cfg.loader.port);
    CHECK(cap.records[di].service == "http");
    CHECK(cap.truths[di].note == "fetched binary");

    std::string victim_ip = IpAddr::v4(victim).to_string();

    // Walk backwards: the report announcing this victim precedes the
    // download, the brute chain precedes the report, the opening probe
    // precedes the chain — all against the same victim, all by one finder.
    size_t ri = di;
    while (ri > 0 && !(cap.truths[ri].stage == Stage::Report &&
                       cap.truths[ri].note == "victim=" + victim_ip))
      --ri;
    REQUIRE(cap.truths[ri].stage == Stage::Report);
    CHECK(ri < di);
    CHECK(cap.records[ri].resp_h.v4_value() == report);
    CHECK(cap.records[ri].resp_p == cfg.report_server.port);
    uint32_t finder = cap.records[ri].orig_h.v4_value();
    CHECK(cfg.in_pool(finder));

    std::vector<size_t> brutes;
    size_t probe_open = cap.records.size();
    for (size_t i = 0; i < ri; ++i) {
      if (cap.records[i].resp_h.v4_value() != victim) continue;
      if (cap.truths[i].note.rfind("brute ", 0) == 0 &&
          cap.records[i].orig_h.v4_value() == finder)
        brutes.push_back(i);
      if (cap.truths[i].note == "probe open" &&
          cap.records[i].orig_h.v4_value() == finder)
        probe_open = i;
    }
    REQUIRE(probe_open < cap.records.size());
    REQUIRE(brutes.size() >= 3);
    CHECK(brutes.size() <= 5);
    CHECK(probe_open < brutes.front());
    for (size_t bi : brutes) {
      CHECK(cap.records[bi].resp_p == 23);
      CHECK(cap.records[bi].conn_state == "SF");
    }
    // Only the final attempt succeeds.
    for (size_t k = 0; k + 1 < brutes.size(); ++k)
      CHECK(cap.truths[brutes[k]].note.rfind("brute attempt ", 0) == 0);
    CHECK(cap.truths[brutes.back()].note.rfind("brute success ", 0) == 0);

    // Strictly forward in time along the chain.
    CHECK(cap.records[probe_open].ts_us < cap.records[brutes.front()].ts_us);
    CHECK(cap.records[brutes.back()].ts_us < cap.records[ri].ts_us);
    CHECK(cap.records[ri].ts_us < cap.records[di].ts_us);

    // After infection the victim joins command-and-control.
    bool joined = false;
    for (size_t i = di + 1; i < cap.records.size() && !joined; ++i)
      joined = cap.truths[i].stage == Stage::C2 &&
               cap.records[i].orig_h.v4_value() == victim &&
               cap.records[i].resp_h.v4_value() == c2;
    CHECK(joined);
  }

  // The infection series is monotone and bracketed by seed and final counts.
  const auto& series = cap.summary.infection_series;
  REQUIRE_FALSE(series.empty());
  CHECK(series.front().first == 0.0);
  CHECK(series.front().second == 1);
  for (size_t i = 1; i < series.size(); ++i) {
    CHECK(series[i].first >= series[i - 1].first);
    CHECK(series[i].second == series[i - 1].second + 1);
  }
  CHECK(series.back().second == cap.summary.final_infected);
}

TEST_CASE("probe outcomes encode pool state and dial fate") {
  ScenarioConfig cfg = small_config(23, 600.0);
  SimCapture cap = run_capture(cfg);

  uint64_t port23 = 0, port2323 = 0, refused = 0, silent = 0;
  for (size_t i = 0; i < cap.records.size(); ++i) {
    const auto& note = cap.truths[i].note;
    const auto& rec = cap.records[i];
    if (cap.truths[i].stage != Stage::Scan) continue;
    if (note.rfind("probe", 0) == 0) {
      CHECK((rec.resp_p == 23 || rec.resp_p == 2323));
      (rec.resp_p == 23 ? port23 : port2323) += 1;
      bool on_pool = cfg.in_pool(rec.resp_h.v4_value());
      CHECK_FALSE(cfg.excluded.contains_u32(rec.resp_h.v4_value()));
      CHECK_FALSE(cfg.is_infra(rec.resp_h.v4_value()));
      CHECK(cfg.allowed.contains_u32(rec.resp_h.v4_value()));
      if (note == "probe open") {
        CHECK(on_pool);
        CHECK(rec.conn_state == "SF");
      } else if (note == "probe taken") {
        CHECK(on_pool);
        CHECK(rec.conn_state == "REJ");
      } else if (note == "probe refused") {
        CHECK_FALSE(on_pool);
        CHECK(rec.conn_state == "REJ");
        ++refused;
      } else if (note == "probe silent") {
        CHECK_FALSE(on_pool);
        CHECK(rec.conn_state == "S0");
        CHECK(rec.resp_pkts == 0);
        ++silent;
      } else {
        FAIL("unexpected probe note: " << note);
      }
    }
  }
  // Both telnet ports get exercised, roughly evenly.
  CHECK(port23 > 0);
  CHECK(port2323 > 0);
  double port_ratio = double(port23) / double(port23 + port2323);
  CHECK(port_ratio > 0.4);
  CHECK(port_ratio < 0.6);
  // Off-pool dials refuse at roughly dial_success_prob (0.1 here).
  REQUIRE(refused + silent > 1000);
  double refuse_ratio = double(refused) / double(refused + silent);
  CHECK(refuse_ratio > 0.05);
  CHECK(refuse_ratio < 0.16);
}

TEST_CASE("saturation time tracks the analytic expectation") {
  // 64 vulnerable nodes inside an allowed /16, one seed, two probes per
  // second per bot.  Under random scanning the expected time to full
  // saturation is (N/r) * (2/P) * H(P-1): the coupon-collector sum over
  // pairwise discovery rates.
  ScenarioConfig cfg = ScenarioConfig::from_json(R"({
    "rng_seed": 1234,
    "duration": 7500,
    "start_ts": 1600000000.0,
    "vulnerable_pool": ["10.2.0.0/26"],
    "seed_bots": ["10.2.0.1"],
    "allowed_scan_ranges": ["10.2.0.0/16"],
    "excluded_ranges": ["10.2.255.0/24"],
    "infrastructure": {
      "report_server": {"ip": "192.0.2.10"},
      "loader": {"ip": "192.0.2.20"},
      "c2_server": {"ip": "192.0.2.30"}
    },
    "scan_rate": 2.0,
    "dial_success_prob": 0.05,
    "benign_external_count": 0
  })");

  // Counting sink: this run emits several hundred thousand records.
  uint64_t records = 0;
  SimSinks sinks;
  sinks.record = [&](const ConnRecord&) { ++records; };
  sinks.truth = [&](const TruthRecord&) {};
  SimSummary summary = run_simulation(cfg, sinks);

  const double kPool = 64.0;
  CHECK(summary.final_infected == 64);
  CHECK(summary.total_records == records);

  double h = 0.0;
  for (int k = 1; k <= 63; ++k) h += 1.0 / k;
  double n_effective = 65536.0 - 256.0;  // allowed minus the excluded /24
  double expected = (n_effective / 2.0) * (2.0 / kPool) * h;

  double saturated_at = summary.infection_series.back().first;
  INFO("saturation at " << saturated_at << " s, expectation " << expected << " s");
  // One seeded draw of a heavy-tailed sum: allow a generous band around the
  // expectation, which still rules out wrong scalings of N, P, or r.
  CHECK(saturated_at > 0.4 * expected);
  CHECK(saturated_at < 1.6 * expected);
}

TEST_CASE("credentials follow the configured shape") {
  nlohmann::json j =
      nlohmann::json::parse(tftest::small_scenario_json(31, 600.0));
  j["credential_spec"] = {{"username_len", 5}, {"password_len", 7}};
  ScenarioConfig cfg = ScenarioConfig::from_json(j.dump());
  CHECK(cfg.username_len == 5);
  CHECK(cfg.password_len == 7);

  SimCapture cap = run_capture(cfg);
  int checked = 0;
  for (const auto& t : cap.truths) {
    if (t.note.rfind("brute ", 0) != 0) continue;
    size_t upos = t.note.find("user=");
    size_t ppos = t.note.find(" pass=");
    REQUIRE(upos != std::string::npos);
    REQUIRE(ppos != std::string::npos);
    std::string user = t.note.substr(upos + 5, ppos - (upos + 5));
    std::string pass = t.note.substr(ppos + 6);
    CHECK(user.size() == 5);
    CHECK(pass.size() == 7);
    for (char c : user + pass) CHECK(std::isalnum(static_cast<unsigned char>(c)));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("benign browsing stays in its lane") {
  ScenarioConfig cfg = small_config(41, 600.0);
  auto population = cfg.benign_population();
  std::unordered_set<uint32_t> pop_set(population.begin(), population.end());
  std::unordered_set<uint32_t> engines(population.begin(),
                                       population.begin() + 5);

  SimCapture cap = run_capture(cfg);
  uint64_t browse = 0, search = 0;
  for (size_t i = 0; i < cap.records.size(); ++i) {
    if (cap.truths[i].stage != Stage::GeneratedBenign) continue;
    const auto& rec = cap.records[i];
    CHECK(cfg.in_pool(rec.orig_h.v4_value()));
    CHECK(pop_set.count(rec.resp_h.v4_value()) == 1);
    CHECK(rec.conn_state == "SF");
    if (cap.truths[i].note == "browse") {
      ++browse;
      if (rec.resp_p == 443) {
        CHECK(rec.service == "ssl");
      } else {
        CHECK(rec.resp_p == 80);
        CHECK(rec.service == "http");
      }
    } else if (cap.truths[i].note == "search") {
      ++search;
      CHECK(rec.resp_p == 443);
      CHECK(rec.service == "ssl");
      CHECK(engines.count(rec.resp_h.v4_value()) == 1);
    } else {
      FAIL("unexpected benign note: " << cap.truths[i].note);
    }
  }
  CHECK(browse > 0);
  CHECK(search > 0);
  // With 0.7/0.3 rates, browsing dominates.
  CHECK(browse > search);

  // Turning the rates off silences the plugin entirely.
  nlohmann::json quiet = nlohmann::json::parse(tftest::small_scenario_json(41, 600.0));
  quiet["benign"] = {{"browse_rate", 0.0}, {"search_rate", 0.0}};
  SimCapture none = run_capture(ScenarioConfig::from_json(quiet.dump()));
  CHECK(none.summary.stage_counts.count("GENERATED_BENIGN") == 0);

  // An empty external population disables it too, without erroring.
  nlohmann::json empty = nlohmann::json::parse(tftest::small_scenario_json(41, 600.0));
  empty["benign_external_count"] = 0;
  SimCapture hermit = run_capture(ScenarioConfig::from_json(empty.dump()));
  CHECK(hermit.summary.stage_counts.count("GENERATED_BENIGN") == 0);
}

TEST_CASE("truth records and stage names round-trip") {
  for (Stage s : {Stage::Scan, Stage::Report, Stage::Download, Stage::C2,
                  Stage::GeneratedBenign}) {
    Stage back;
    REQUIRE(stage_from_name(stage_name(s), back));
    CHECK(back == s);

    TruthRecord rec{"Cabc123", s, "10.0.0.1", "note with spaces=and tokens"};
    TruthRecord rt = parse_truth(serialize_truth(rec));
    CHECK(rt.uid == rec.uid);
    CHECK(rt.stage == rec.stage);
    CHECK(rt.actor == rec.actor);
    CHECK(rt.note == rec.note);
  }
  CHECK(stage_name(Stage::Scan) == std::string("SCAN"));
  CHECK(stage_name(Stage::GeneratedBenign) == std::string("GENERATED_BENIGN"));

  Stage out;
  CHECK_FALSE(stage_from_name("NATURAL", out));
  CHECK_FALSE(stage_from_name("", out));
  CHECK_THROWS_AS(parse_truth("{broken"), Error);
  CHECK_THROWS_AS(parse_truth(R"({"uid":"C1","stage":"VIBE","actor":"a"})"), Error);
  CHECK_THROWS_AS(parse_truth(R"({"stage":"SCAN","actor":"a"})"), Error);
}

TEST_CASE("simulate_to_dir writes conn, truth, and summary together") {
  TempDir dir;
  ScenarioConfig cfg = small_config(53, 300.0);

  SimulateResult res =
      simulate_to_dir(cfg, dir.path() + "/tsv", LogFormat::ZeekTsv);
  CHECK(res.conn_path == dir.path() + "/tsv/conn.log");
  REQUIRE(std::filesystem::exists(res.conn_path));
  REQUIRE(std::filesystem::exists(res.truth_path));
  REQUIRE(std::filesystem::exists(res.summary_path));

  auto records = tftest::read_records(res.conn_path);
  CHECK(records.size() == res.summary.total_records);

  // Every stream record has exactly one truth line, same uid, same order.
  std::ifstream truth_in(res.truth_path);
  std::string line;
  size_t idx = 0;
  while (std::getline(truth_in, line)) {
    REQUIRE(idx < records.size());
    CHECK(parse_truth(line).uid == records[idx].uid);
    ++idx;
  }
  CHECK(idx == records.size());

  nlohmann::json summary =
      nlohmann::json::parse(tftest::read_file(res.summary_path));
  CHECK(summary["rng_seed"] == 53);
  CHECK(summary["pool_size"] == 16);
  CHECK(summary["total_records"] == records.size());
  CHECK(summary["final_infected"] == res.summary.final_infected);
  CHECK(summary.contains("stage_counts"));
  CHECK(summary.contains("infection_series"));

  // Same scenario, JSON lines: same record count, different container.
  SimulateResult jres =
      simulate_to_dir(cfg, dir.path() + "/json", LogFormat::JsonLines);
  CHECK(jres.conn_path == dir.path() + "/json/conn.json");
  CHECK(tftest::read_records(jres.conn_path).size() == records.size());

  // Identical configs produce byte-identical artifacts.
  SimulateResult res2 =
      simulate_to_dir(cfg, dir.path() + "/tsv2", LogFormat::ZeekTsv);
  CHECK(tftest::read_file(res2.conn_path) == tftest::read_file(res.conn_path));
  CHECK(tftest::read_file(res2.truth_path) == tftest::read_file(res.truth_path));
  CHECK(tftest::read_file(res2.summary_path) ==
        tftest::read_file(res.summary_path));
}
