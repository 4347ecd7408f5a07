// Exercises the shared library exactly the way an external consumer would:
// through trafficforge.h alone, with no access to internal headers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <trafficforge.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr const char* kKeyHex =
    "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f";

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path root;
  TempDir() {
    static int counter = 0;
    root = fs::temp_directory_path() /
           ("tf_capi_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(root);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  std::string file(const std::string& name) const {
    return (root / name).string();
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string scenario_json(uint64_t seed, double duration,
                          const std::string& c2_ip = "192.0.2.30") {
  std::ostringstream j;
  j << "{\n"
    << "  \"rng_seed\": " << seed << ",\n"
    << "  \"duration\": " << duration << ",\n"
    << "  \"start_ts\": 1600000000.0,\n"
    << "  \"vulnerable_pool\": [\"10.1.0.0/28\"],\n"
    << "  \"seed_bots\": [\"10.1.0.1\"],\n"
    << "  \"allowed_scan_ranges\": [\"10.1.0.0/24\"],\n"
    << "  \"excluded_ranges\": [\"10.1.0.240/28\"],\n"
    << "  \"infrastructure\": {\n"
    << "    \"report_server\": {\"ip\": \"192.0.2.10\", \"port\": 48101},\n"
    << "    \"loader\": {\"ip\": \"192.0.2.20\", \"http_port\": 80},\n"
    << "    \"c2_server\": {\"ip\": \"" << c2_ip << "\", \"port\": 23}\n"
    << "  },\n"
    << "  \"scan_rate\": 2.0,\n"
    << "  \"dial_success_prob\": 0.1,\n"
    << "  \"benign_external_count\": 25\n"
    << "}\n";
  return j.str();
}

struct KeysetGuard {
  tf_keyset* keys = nullptr;
  ~KeysetGuard() { tf_keyset_destroy(keys); }
};
struct PolicyGuard {
  tf_policy* policy = nullptr;
  ~PolicyGuard() { tf_policy_destroy(policy); }
};
struct AnonymizerGuard {
  tf_anonymizer* anon = nullptr;
  ~AnonymizerGuard() { tf_anonymizer_destroy(anon); }
};
struct ScenarioGuard {
  tf_scenario* scenario = nullptr;
  ~ScenarioGuard() { tf_scenario_destroy(scenario); }
};
struct RosterGuard {
  tf_roster* roster = nullptr;
  ~RosterGuard() { tf_roster_destroy(roster); }
};

}  // namespace

TEST_CASE("version string and error channel") {
  REQUIRE(tf_version() != nullptr);
  CHECK(std::string(tf_version()) == "1.0.0");

  // Anything that isn't 64 hex digits is taken as a key-file path.
  KeysetGuard ks;
  CHECK(tf_keyset_open("no/such/key/file", &ks.keys) == TF_ERROR_IO);
  CHECK(std::string(tf_last_error()).empty() == false);

  // A readable file with garbage in it is a configuration problem.
  TempDir dir;
  std::string corrupt = dir.file("corrupt.key");
  write_text(corrupt, "these are not hex digits at all, certainly not 64\n");
  CHECK(tf_keyset_open(corrupt.c_str(), &ks.keys) == TF_ERROR_CONFIG);
  CHECK(std::string(tf_last_error()).find("key file") != std::string::npos);
}

TEST_CASE("NULL arguments are rejected as usage errors") {
  CHECK(tf_keygen(nullptr) == TF_ERROR_USAGE);
  CHECK(tf_keyset_open(kKeyHex, nullptr) == TF_ERROR_USAGE);
  CHECK(tf_policy_default(nullptr) == TF_ERROR_USAGE);
  CHECK(tf_policy_load(nullptr, nullptr) == TF_ERROR_USAGE);
  CHECK(tf_scenario_load(nullptr, nullptr) == TF_ERROR_USAGE);
  CHECK(tf_stats_file(nullptr, nullptr) == TF_ERROR_USAGE);
  CHECK(tf_merge(nullptr, nullptr, nullptr, nullptr) == TF_ERROR_USAGE);
  CHECK(std::string(tf_last_error()).find("NULL") != std::string::npos);

  // Destroy functions tolerate NULL.
  tf_keyset_destroy(nullptr);
  tf_policy_destroy(nullptr);
  tf_anonymizer_destroy(nullptr);
  tf_scenario_destroy(nullptr);
  tf_roster_destroy(nullptr);
  tf_string_free(nullptr);
}

TEST_CASE("key generation, loading, and fingerprints") {
  TempDir dir;
  std::string key_path = dir.file("master.key");
  REQUIRE(tf_keygen(key_path.c_str()) == TF_OK);
  REQUIRE(fs::exists(key_path));
  auto perms = fs::status(key_path).permissions();
  CHECK((perms & fs::perms::group_all) == fs::perms::none);
  CHECK((perms & fs::perms::others_all) == fs::perms::none);

  // The same file resolves to the same fingerprint every time.
  KeysetGuard a, b;
  REQUIRE(tf_keyset_open(key_path.c_str(), &a.keys) == TF_OK);
  REQUIRE(tf_keyset_open(key_path.c_str(), &b.keys) == TF_OK);
  char fa[17], fb[17];
  REQUIRE(tf_keyset_fingerprint(a.keys, fa, sizeof(fa)) == TF_OK);
  REQUIRE(tf_keyset_fingerprint(b.keys, fb, sizeof(fb)) == TF_OK);
  CHECK(std::string(fa) == std::string(fb));
  CHECK(std::string(fa).size() == 16);

  // Inline hex resolves too, with a stable fingerprint.
  KeysetGuard fixed;
  REQUIRE(tf_keyset_open(kKeyHex, &fixed.keys) == TF_OK);
  char fp[17];
  REQUIRE(tf_keyset_fingerprint(fixed.keys, fp, sizeof(fp)) == TF_OK);
  CHECK(std::string(fp) == "630dcd2966c43366");

  // Too-small fingerprint buffer is a usage error, not a truncation.
  char tiny[8];
  CHECK(tf_keyset_fingerprint(fixed.keys, tiny, sizeof(tiny)) ==
        TF_ERROR_USAGE);

  // Environment fallback: hex in TRAFFICFORGE_KEY, arg empty.
  ::setenv("TRAFFICFORGE_KEY", kKeyHex, 1);
  KeysetGuard env;
  REQUIRE(tf_keyset_open(nullptr, &env.keys) == TF_OK);
  char fe[17];
  REQUIRE(tf_keyset_fingerprint(env.keys, fe, sizeof(fe)) == TF_OK);
  CHECK(std::string(fe) == "630dcd2966c43366");
  ::unsetenv("TRAFFICFORGE_KEY");

  // No argument, no environment: configuration error.
  KeysetGuard none;
  CHECK(tf_keyset_open("", &none.keys) == TF_ERROR_CONFIG);
  CHECK(std::string(tf_last_error()).find("TRAFFICFORGE_KEY") !=
        std::string::npos);
}

TEST_CASE("address and field anonymization through the C surface") {
  KeysetGuard ks;
  REQUIRE(tf_keyset_open(kKeyHex, &ks.keys) == TF_OK);
  PolicyGuard pol;
  REQUIRE(tf_policy_default(&pol.policy) == TF_OK);
  AnonymizerGuard an;
  REQUIRE(tf_anonymizer_create(ks.keys, pol.policy, &an.anon) == TF_OK);

  char buf[64];
  REQUIRE(tf_anonymize_ip(an.anon, "10.1.0.1", buf, sizeof(buf)) == TF_OK);
  CHECK(std::string(buf) == "138.6.252.98");
  REQUIRE(tf_anonymize_ip(an.anon, "192.0.2.33", buf, sizeof(buf)) == TF_OK);
  CHECK(std::string(buf) == "56.56.255.216");
  REQUIRE(tf_anonymize_ip(an.anon, "2001:db8::1", buf, sizeof(buf)) == TF_OK);
  CHECK(std::string(buf) == "c790:ee37:ff81:bc1f:ffee:fcfe:3f41:ffc1");

  REQUIRE(tf_anonymize_field(an.anon, "uid", "CtestUID", buf, sizeof(buf)) ==
          TF_OK);
  CHECK(std::string(buf) == "a7ada3cd495c2036");
  // A different value class keys a different hash stream.
  REQUIRE(tf_anonymize_field(an.anon, "host", "CtestUID", buf, sizeof(buf)) ==
          TF_OK);
  CHECK(std::string(buf) == "de7f7910a26bd43e");

  char tiny[4];
  CHECK(tf_anonymize_ip(an.anon, "10.1.0.1", tiny, sizeof(tiny)) ==
        TF_ERROR_USAGE);
  CHECK(tf_anonymize_ip(an.anon, "not-an-address", buf, sizeof(buf)) !=
        TF_OK);
}

TEST_CASE("policy loading and hash length control") {
  TempDir dir;

  std::string good = dir.file("policy.json");
  write_text(good, "{\"service\": \"drop\"}\n");
  PolicyGuard loaded;
  REQUIRE(tf_policy_load(good.c_str(), &loaded.policy) == TF_OK);

  std::string bad = dir.file("bad.json");
  write_text(bad, "{nope\n");
  PolicyGuard broken;
  CHECK(tf_policy_load(bad.c_str(), &broken.policy) == TF_ERROR_CONFIG);

  std::string wrong = dir.file("wrong.json");
  write_text(wrong, "{\"ts\": \"hash\"}\n");
  PolicyGuard refused;
  CHECK(tf_policy_load(wrong.c_str(), &refused.policy) == TF_ERROR_CONFIG);

  PolicyGuard pol;
  REQUIRE(tf_policy_default(&pol.policy) == TF_OK);
  CHECK(tf_policy_set_hash_len(pol.policy, 7) == TF_ERROR_CONFIG);
  CHECK(tf_policy_set_hash_len(pol.policy, 65) == TF_ERROR_CONFIG);
  REQUIRE(tf_policy_set_hash_len(pol.policy, 32) == TF_OK);

  // The length flows into field hashing.
  KeysetGuard ks;
  REQUIRE(tf_keyset_open(kKeyHex, &ks.keys) == TF_OK);
  AnonymizerGuard an;
  REQUIRE(tf_anonymizer_create(ks.keys, pol.policy, &an.anon) == TF_OK);
  char buf[64];
  REQUIRE(tf_anonymize_field(an.anon, "uid", "", buf, sizeof(buf)) == TF_OK);
  CHECK(std::string(buf) == "1a49915722191183318aba638aa16b7c");
}

TEST_CASE("the full dataset workflow drives end to end in C") {
  TempDir dir;
  std::string scen_path = dir.file("scenario.json");
  write_text(scen_path, scenario_json(5, 400.0));

  ScenarioGuard scen;
  REQUIRE(tf_scenario_load(scen_path.c_str(), &scen.scenario) == TF_OK);
  REQUIRE(tf_scenario_set_seed(scen.scenario, 31) == TF_OK);

  // Simulate.
  std::string sim_dir = dir.file("sim");
  tf_sim_summary sim{};
  REQUIRE(tf_simulate(scen.scenario, sim_dir.c_str(), nullptr, &sim) == TF_OK);
  CHECK(sim.rng_seed == 31);
  CHECK(sim.pool_size == 16);
  CHECK(sim.total_records > 0);
  CHECK(sim.final_infected >= 1);
  std::string conn_path = sim_dir + "/conn.log";
  std::string truth_path = sim_dir + "/truth.jsonl";
  REQUIRE(fs::exists(conn_path));
  REQUIRE(fs::exists(truth_path));

  // Safety sweep: clean, and the JSON report lands on disk.
  std::string safety_path = dir.file("safety.json");
  tf_safety_summary safety{};
  REQUIRE(tf_verify_safety(conn_path.c_str(), scen.scenario,
                           safety_path.c_str(), &safety) == TF_OK);
  CHECK(safety.violation_count == 0);
  CHECK(safety.records_checked == sim.total_records);
  CHECK(read_text(safety_path).find("\"violation_count\"") !=
        std::string::npos);

  // Anonymize the stream.
  KeysetGuard ks;
  REQUIRE(tf_keyset_open(kKeyHex, &ks.keys) == TF_OK);
  PolicyGuard pol;
  REQUIRE(tf_policy_default(&pol.policy) == TF_OK);
  std::string anon_path = dir.file("anon.log");
  tf_anonymize_report anon{};
  REQUIRE(tf_anonymize_file(ks.keys, pol.policy, conn_path.c_str(),
                            anon_path.c_str(), 1, 1, &anon) == TF_OK);
  CHECK(anon.records_in == sim.total_records);
  CHECK(anon.records_out == sim.total_records);
  CHECK(anon.malformed_skipped == 0);
  CHECK(read_text(anon_path).find("10.1.0.") == std::string::npos);

  // Rosters: raw for the raw stream, keyed for the anonymized one.
  RosterGuard raw_roster;
  REQUIRE(tf_roster_from_scenario(scen.scenario, nullptr,
                                  &raw_roster.roster) == TF_OK);
  std::string roster_path = dir.file("roster.json");
  REQUIRE(tf_roster_save(raw_roster.roster, roster_path.c_str()) == TF_OK);
  RosterGuard reloaded;
  REQUIRE(tf_roster_load(roster_path.c_str(), &reloaded.roster) == TF_OK);
  std::string roster_path2 = dir.file("roster2.json");
  REQUIRE(tf_roster_save(reloaded.roster, roster_path2.c_str()) == TF_OK);
  CHECK(read_text(roster_path) == read_text(roster_path2));

  RosterGuard keyed_roster;
  REQUIRE(tf_roster_from_scenario(scen.scenario, ks.keys,
                                  &keyed_roster.roster) == TF_OK);

  // Label the raw stream against truth: exact agreement.
  std::string labeled_raw = dir.file("labeled_raw.log");
  std::string label_report = dir.file("label_report.json");
  tf_label_summary lab{};
  REQUIRE(tf_label_file(conn_path.c_str(), labeled_raw.c_str(),
                        raw_roster.roster, nullptr, truth_path.c_str(),
                        label_report.c_str(), &lab) == TF_OK);
  CHECK(lab.total_records == sim.total_records);
  CHECK(lab.coverage == 1.0);
  CHECK(lab.with_truth == 1);
  CHECK(read_text(label_report).find("\"stage_errors\": 0") !=
        std::string::npos);

  // Label the anonymized stream with the keyed roster (no truth).
  std::string labeled_anon = dir.file("labeled_anon.log");
  tf_label_summary lab2{};
  REQUIRE(tf_label_file(anon_path.c_str(), labeled_anon.c_str(),
                        keyed_roster.roster, nullptr, nullptr, nullptr,
                        &lab2) == TF_OK);
  CHECK(lab2.total_records == sim.total_records);
  CHECK(lab2.coverage == 1.0);
  CHECK(lab2.with_truth == 0);

  // Stats over the labeled stream.
  char* stats_json = nullptr;
  REQUIRE(tf_stats_file(labeled_raw.c_str(), &stats_json) == TF_OK);
  REQUIRE(stats_json != nullptr);
  CHECK(std::string(stats_json).find("\"record_count\"") != std::string::npos);
  CHECK(std::string(stats_json).find("\"label_counts\"") != std::string::npos);
  tf_string_free(stats_json);

  // Merging a stream with itself doubles it.
  std::string merged = dir.file("merged.log");
  tf_merge_report mr{};
  REQUIRE(tf_merge(conn_path.c_str(), conn_path.c_str(), merged.c_str(),
                   &mr) == TF_OK);
  CHECK(mr.left_records == sim.total_records);
  CHECK(mr.right_records == sim.total_records);
  CHECK(mr.out_records == 2 * sim.total_records);

  // Bench the anonymizer over the generated stream.
  char* bench_json = nullptr;
  REQUIRE(tf_bench_anonymize(conn_path.c_str(), ks.keys, nullptr, 2,
                             &bench_json) == TF_OK);
  REQUIRE(bench_json != nullptr);
  CHECK(std::string(bench_json).find("\"single_rps\"") != std::string::npos);
  CHECK(std::string(bench_json).find("\"parallel_rps\"") != std::string::npos);
  tf_string_free(bench_json);
}

TEST_CASE("recreation and manifest replay through the C surface") {
  TempDir dir;
  std::string scen_path = dir.file("scenario.json");
  write_text(scen_path, scenario_json(13, 350.0));

  KeysetGuard ks;
  REQUIRE(tf_keyset_open(kKeyHex, &ks.keys) == TF_OK);

  std::string out_dir = dir.file("out");
  tf_recreation_params params{};
  params.scenario_path = scen_path.c_str();
  params.out_dir = out_dir.c_str();
  params.threads = 1;
  params.has_seed = 1;
  params.seed = 77;

  tf_recreation_summary summary{};
  REQUIRE(tf_run_recreation(&params, ks.keys, &summary) == TF_OK);
  CHECK(summary.generated_records > 0);
  CHECK(summary.published_records == summary.generated_records);
  CHECK(summary.coverage == 1.0);
  CHECK(summary.malformed_skipped == 0);
  std::string manifest_path = out_dir + "/manifest.json";
  REQUIRE(fs::exists(manifest_path));
  REQUIRE(fs::exists(out_dir + "/labeled.log"));

  // Replay into a second directory: same record count, identical bytes.
  std::string replay_dir = dir.file("replay");
  tf_recreation_summary replay{};
  REQUIRE(tf_run_from_manifest(manifest_path.c_str(), ks.keys,
                               replay_dir.c_str(), 1, &replay) == TF_OK);
  CHECK(replay.published_records == summary.published_records);
  CHECK(read_text(replay_dir + "/labeled.log") ==
        read_text(out_dir + "/labeled.log"));
  CHECK(read_text(replay_dir + "/truth.jsonl") ==
        read_text(out_dir + "/truth.jsonl"));

  // A different key cannot replay the manifest.
  std::string other_hex = kKeyHex;
  other_hex[0] = 'f';
  KeysetGuard other;
  REQUIRE(tf_keyset_open(other_hex.c_str(), &other.keys) == TF_OK);
  CHECK(tf_run_from_manifest(manifest_path.c_str(), other.keys,
                             dir.file("r2").c_str(), 1, nullptr) ==
        TF_ERROR_CONFIG);
  CHECK(std::string(tf_last_error()).find("fingerprint") != std::string::npos);
}

TEST_CASE("the safety gate surfaces as TF_ERROR_SAFETY") {
  TempDir dir;
  // C2 server placed inside excluded_ranges: containment fails at runtime.
  std::string scen_path = dir.file("scenario.json");
  write_text(scen_path, scenario_json(7, 300.0, "10.1.0.245"));

  KeysetGuard ks;
  REQUIRE(tf_keyset_open(kKeyHex, &ks.keys) == TF_OK);

  std::string out_dir = dir.file("out");
  tf_recreation_params params{};
  params.scenario_path = scen_path.c_str();
  params.out_dir = out_dir.c_str();
  params.threads = 1;

  CHECK(tf_run_recreation(&params, ks.keys, nullptr) == TF_ERROR_SAFETY);
  CHECK(std::string(tf_last_error()).find("nothing published") !=
        std::string::npos);
  CHECK_FALSE(fs::exists(out_dir + "/manifest.json"));
  CHECK_FALSE(fs::exists(out_dir + "/labeled.log"));
}
