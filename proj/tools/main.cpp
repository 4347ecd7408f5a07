// trafficforge command line.  Thin shell over the public C API: parses
// arguments, forwards to the library, prints one-line results, and turns
// tf_status values into exit codes.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "trafficforge.h"

namespace {

const char* category_word(tf_status status) {
  switch (status) {
    case TF_OK:
      return "ok";
    case TF_ERROR_USAGE:
      return "usage";
    case TF_ERROR_CONFIG:
      return "config";
    case TF_ERROR_SAFETY:
      return "safety";
    case TF_ERROR_IO:
      return "io";
  }
  return "error";
}

int fail(tf_status status) {
  std::fprintf(stderr, "error: %s: %s\n", category_word(status),
               tf_last_error());
  return static_cast<int>(status);
}

int usage_fail(const std::string& message) {
  std::fprintf(stderr, "error: usage: %s\n", message.c_str());
  return static_cast<int>(TF_ERROR_USAGE);
}

using KeysetPtr = std::unique_ptr<tf_keyset, decltype(&tf_keyset_destroy)>;
using PolicyPtr = std::unique_ptr<tf_policy, decltype(&tf_policy_destroy)>;
using ScenarioPtr = std::unique_ptr<tf_scenario, decltype(&tf_scenario_destroy)>;
using RosterPtr = std::unique_ptr<tf_roster, decltype(&tf_roster_destroy)>;

// Loads --policy (or the built-in default) and applies --hash-len.
tf_status open_policy(const std::string& path, size_t hash_len,
                      PolicyPtr& out) {
  tf_policy* raw = nullptr;
  tf_status st = path.empty() ? tf_policy_default(&raw)
                              : tf_policy_load(path.c_str(), &raw);
  if (st != TF_OK) return st;
  out.reset(raw);
  if (hash_len > 0) return tf_policy_set_hash_len(out.get(), hash_len);
  return TF_OK;
}

bool write_text_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << text;
  out.flush();
  return static_cast<bool>(out);
}

struct AnonymizeArgs {
  std::string key, policy, in, out;
  bool strict = false;
  int threads = 1;
  size_t hash_len = 0;
};

int run_anonymize(const AnonymizeArgs& args) {
  tf_keyset* keys_raw = nullptr;
  tf_status st = tf_keyset_open(args.key.empty() ? nullptr : args.key.c_str(),
                                &keys_raw);
  if (st != TF_OK) return fail(st);
  KeysetPtr keys(keys_raw, tf_keyset_destroy);

  PolicyPtr policy(nullptr, tf_policy_destroy);
  st = open_policy(args.policy, args.hash_len, policy);
  if (st != TF_OK) return fail(st);

  tf_anonymize_report report{};
  st = tf_anonymize_file(keys.get(), policy.get(), args.in.c_str(),
                         args.out.c_str(), args.strict ? 1 : 0, args.threads,
                         &report);
  if (st != TF_OK) return fail(st);
  std::printf("anonymized %" PRIu64 " records -> %s (%" PRIu64
              " malformed skipped)\n",
              report.records_out, args.out.c_str(), report.malformed_skipped);
  return 0;
}

struct SimulateArgs {
  std::string scenario, out, format = "zeek-tsv";
  uint64_t seed = 0;
  double start_ts = 0.0;
  bool has_seed = false, has_start = false;
};

int run_simulate(const SimulateArgs& args) {
  tf_scenario* raw = nullptr;
  tf_status st = tf_scenario_load(args.scenario.c_str(), &raw);
  if (st != TF_OK) return fail(st);
  ScenarioPtr scenario(raw, tf_scenario_destroy);
  if (args.has_seed) tf_scenario_set_seed(scenario.get(), args.seed);
  if (args.has_start) tf_scenario_set_start_ts(scenario.get(), args.start_ts);

  tf_sim_summary summary{};
  st = tf_simulate(scenario.get(), args.out.c_str(), args.format.c_str(),
                   &summary);
  if (st != TF_OK) return fail(st);
  std::printf("simulated %" PRIu64 " records, %d/%" PRIu64
              " pool nodes infected -> %s\n",
              summary.total_records, summary.final_infected, summary.pool_size,
              args.out.c_str());
  return 0;
}

struct LabelArgs {
  std::string roster, rules, truth, report, in, out;
};

int run_label(const LabelArgs& args) {
  tf_roster* raw = nullptr;
  tf_status st = tf_roster_load(args.roster.c_str(), &raw);
  if (st != TF_OK) return fail(st);
  RosterPtr roster(raw, tf_roster_destroy);

  tf_label_summary summary{};
  st = tf_label_file(args.in.c_str(), args.out.c_str(), roster.get(),
                     args.rules.empty() ? nullptr : args.rules.c_str(),
                     args.truth.empty() ? nullptr : args.truth.c_str(),
                     args.report.empty() ? nullptr : args.report.c_str(),
                     &summary);
  if (st != TF_OK) return fail(st);
  std::printf("labeled %" PRIu64 " records -> %s (coverage %.4f%s)\n",
              summary.total_records, args.out.c_str(), summary.coverage,
              summary.with_truth ? ", scored against truth" : "");
  return 0;
}

struct RecreationArgs {
  std::string scenario, natural, policy, rules, key, out_dir;
  std::string format = "zeek-tsv";
  std::string from_manifest;
  int threads = 1;
  uint64_t seed = 0;
  double start_ts = 0.0;
  size_t hash_len = 0;
  bool has_seed = false, has_start = false;
};

int run_recreation(const RecreationArgs& args) {
  tf_keyset* keys_raw = nullptr;
  tf_status st = tf_keyset_open(args.key.empty() ? nullptr : args.key.c_str(),
                                &keys_raw);
  if (st != TF_OK) return fail(st);
  KeysetPtr keys(keys_raw, tf_keyset_destroy);

  tf_recreation_summary summary{};
  if (!args.from_manifest.empty()) {
    st = tf_run_from_manifest(args.from_manifest.c_str(), keys.get(),
                              args.out_dir.c_str(), args.threads, &summary);
    if (st != TF_OK) return fail(st);
    std::printf("replayed %s: %" PRIu64
                " records match the recorded digests\n",
                args.from_manifest.c_str(), summary.published_records);
    return 0;
  }

  tf_recreation_params params{};
  params.scenario_path = args.scenario.c_str();
  params.natural_path = args.natural.empty() ? nullptr : args.natural.c_str();
  params.policy_path = args.policy.empty() ? nullptr : args.policy.c_str();
  params.rules_path = args.rules.empty() ? nullptr : args.rules.c_str();
  params.out_dir = args.out_dir.c_str();
  params.format = args.format.c_str();
  params.threads = args.threads;
  params.has_seed = args.has_seed ? 1 : 0;
  params.seed = args.seed;
  params.has_start_ts = args.has_start ? 1 : 0;
  params.start_ts = args.start_ts;
  params.hash_hex_len = args.hash_len;

  st = tf_run_recreation(&params, keys.get(), &summary);
  if (st != TF_OK) return fail(st);
  std::printf("generated %" PRIu64 " records (%d infected), published %" PRIu64
              " labeled records (coverage %.4f)\n",
              summary.generated_records, summary.final_infected,
              summary.published_records, summary.coverage);
  std::printf("manifest %s/manifest.json\n", args.out_dir.c_str());
  return 0;
}

struct BenchArgs {
  std::string in, key, policy, out;
  int threads = 0;
};

int run_bench(const BenchArgs& args) {
  tf_keyset* keys_raw = nullptr;
  tf_status st = tf_keyset_open(args.key.empty() ? nullptr : args.key.c_str(),
                                &keys_raw);
  if (st != TF_OK) return fail(st);
  KeysetPtr keys(keys_raw, tf_keyset_destroy);

  char* json = nullptr;
  st = tf_bench_anonymize(args.in.c_str(), keys.get(),
                          args.policy.empty() ? nullptr : args.policy.c_str(),
                          args.threads, &json);
  if (st != TF_OK) return fail(st);
  std::fputs(json, stdout);
  bool wrote = args.out.empty() || write_text_file(args.out, json);
  tf_string_free(json);
  if (!wrote) {
    std::fprintf(stderr, "error: io: cannot write %s\n", args.out.c_str());
    return static_cast<int>(TF_ERROR_IO);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic botnet traffic datasets: generate, anonymize, "
               "label, publish"};
  app.set_version_flag("--version",
                       std::string("trafficforge ") + tf_version());
  app.require_subcommand(1);

  auto* keygen = app.add_subcommand("keygen", "generate a master key file");
  std::string keygen_out;
  keygen->add_option("--out", keygen_out, "where to write the key (mode 0600)")
      ->required();

  auto* anonymize =
      app.add_subcommand("anonymize", "anonymize a conn log under a policy");
  AnonymizeArgs anon_args;
  anonymize->add_option("--key", anon_args.key,
                        "master key: 64 hex chars or a key file "
                        "(default: TRAFFICFORGE_KEY)");
  anonymize->add_option("--policy", anon_args.policy,
                        "policy JSON (default: built-in policy)");
  anonymize->add_option("--in", anon_args.in, "input conn log")->required();
  anonymize->add_option("--out", anon_args.out, "output path (.gz to compress)")
      ->required();
  anonymize->add_flag("--strict", anon_args.strict,
                      "fail on malformed lines instead of skipping");
  anonymize->add_option("--threads", anon_args.threads,
                        "worker threads, 0 = one per core (default 1)");
  anonymize->add_option("--hash-len", anon_args.hash_len,
                        "hex length of hashed fields (8..64)");

  auto* simulate =
      app.add_subcommand("simulate", "run a botnet scenario to a directory");
  SimulateArgs sim_args;
  simulate->add_option("--scenario", sim_args.scenario, "scenario JSON")
      ->required();
  simulate->add_option("--out", sim_args.out, "output directory")->required();
  auto* sim_seed = simulate->add_option("--seed", sim_args.seed,
                                        "override the scenario rng_seed");
  auto* sim_start = simulate->add_option(
      "--start-ts", sim_args.start_ts, "override the trace start (epoch secs)");
  simulate->add_option("--format", sim_args.format, "output format")
      ->check(CLI::IsMember({"zeek-tsv", "json-lines"}));

  auto* merge =
      app.add_subcommand("merge", "merge two time-sorted conn logs into one");
  std::string merge_left, merge_right, merge_out;
  merge->add_option("--left", merge_left, "first input (wins timestamp ties)")
      ->required();
  merge->add_option("--right", merge_right, "second input")->required();
  merge->add_option("--out", merge_out, "output path")->required();

  auto* label =
      app.add_subcommand("label", "append attack_stage labels to a conn log");
  LabelArgs label_args;
  label->add_option("--roster", label_args.roster, "roster JSON")->required();
  label->add_option("--rules", label_args.rules,
                    "ruleset JSON (default: built-in ruleset)");
  label->add_option("--truth", label_args.truth,
                    "truth sidecar to score against");
  label->add_option("--in", label_args.in, "input conn log")->required();
  label->add_option("--out", label_args.out, "output path")->required();
  label->add_option("--report", label_args.report,
                    "write the JSON label report here");

  auto* stats = app.add_subcommand("stats", "summarize a conn log as JSON");
  std::string stats_in, stats_out;
  stats->add_option("--in", stats_in, "input conn log")->required();
  stats->add_option("--out", stats_out, "also write the JSON here");

  auto* recreation = app.add_subcommand(
      "run-recreation", "simulate, safety-check, merge, anonymize, label and "
                        "publish a dataset with a manifest");
  RecreationArgs run_args;
  auto* rec_scenario =
      recreation->add_option("--scenario", run_args.scenario, "scenario JSON");
  auto* rec_natural = recreation->add_option(
      "--natural", run_args.natural, "natural background log to merge in");
  auto* rec_policy = recreation->add_option("--policy", run_args.policy,
                                            "anonymization policy JSON");
  auto* rec_rules =
      recreation->add_option("--rules", run_args.rules, "labeling rules JSON");
  recreation->add_option("--key", run_args.key,
                         "master key: 64 hex chars or a key file "
                         "(default: TRAFFICFORGE_KEY)");
  recreation->add_option("--out-dir", run_args.out_dir, "publish directory")
      ->required();
  auto* rec_format =
      recreation->add_option("--format", run_args.format, "output format")
          ->check(CLI::IsMember({"zeek-tsv", "json-lines"}));
  recreation->add_option("--threads", run_args.threads,
                         "worker threads, 0 = one per core (default 1)");
  auto* rec_seed = recreation->add_option("--seed", run_args.seed,
                                          "override the scenario rng_seed");
  auto* rec_start = recreation->add_option(
      "--start-ts", run_args.start_ts, "override the trace start (epoch secs)");
  auto* rec_hash = recreation->add_option(
      "--hash-len", run_args.hash_len, "hex length of hashed fields (8..64)");
  auto* rec_manifest = recreation->add_option(
      "--from-manifest", run_args.from_manifest,
      "replay a published manifest instead of taking new inputs");
  rec_manifest->excludes(rec_scenario, rec_natural, rec_policy, rec_rules,
                         rec_format, rec_seed, rec_start, rec_hash);

  auto* bench =
      app.add_subcommand("bench", "measure anonymization throughput");
  BenchArgs bench_args;
  bench->add_option("--in", bench_args.in, "input conn log")->required();
  bench->add_option("--key", bench_args.key,
                    "master key: 64 hex chars or a key file "
                    "(default: TRAFFICFORGE_KEY)");
  bench->add_option("--policy", bench_args.policy,
                    "policy JSON (default: built-in policy)");
  bench->add_option("--threads", bench_args.threads,
                    "parallel pass thread count, 0 = one per core");
  bench->add_option("--out", bench_args.out, "also write the JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_fail(e.what());
  }

  if (app.got_subcommand(keygen)) {
    tf_status st = tf_keygen(keygen_out.c_str());
    if (st != TF_OK) return fail(st);
    tf_keyset* keys = nullptr;
    char fp[32] = {0};
    if (tf_keyset_open(keygen_out.c_str(), &keys) == TF_OK) {
      tf_keyset_fingerprint(keys, fp, sizeof(fp));
      tf_keyset_destroy(keys);
    }
    std::printf("wrote %s (fingerprint %s)\n", keygen_out.c_str(), fp);
    return 0;
  }
  if (app.got_subcommand(anonymize)) return run_anonymize(anon_args);
  if (app.got_subcommand(simulate)) {
    sim_args.has_seed = sim_seed->count() > 0;
    sim_args.has_start = sim_start->count() > 0;
    return run_simulate(sim_args);
  }
  if (app.got_subcommand(merge)) {
    tf_merge_report report{};
    tf_status st = tf_merge(merge_left.c_str(), merge_right.c_str(),
                            merge_out.c_str(), &report);
    if (st != TF_OK) return fail(st);
    std::printf("merged %" PRIu64 " + %" PRIu64 " -> %" PRIu64
                " records (%" PRIu64 " malformed skipped)\n",
                report.left_records, report.right_records, report.out_records,
                report.malformed_skipped);
    return 0;
  }
  if (app.got_subcommand(label)) return run_label(label_args);
  if (app.got_subcommand(stats)) {
    char* json = nullptr;
    tf_status st = tf_stats_file(stats_in.c_str(), &json);
    if (st != TF_OK) return fail(st);
    std::fputs(json, stdout);
    bool wrote = stats_out.empty() || write_text_file(stats_out, json);
    tf_string_free(json);
    if (!wrote) {
      std::fprintf(stderr, "error: io: cannot write %s\n", stats_out.c_str());
      return static_cast<int>(TF_ERROR_IO);
    }
    return 0;
  }
  if (app.got_subcommand(recreation)) {
    if (run_args.from_manifest.empty() && run_args.scenario.empty())
      return usage_fail("run-recreation needs --scenario or --from-manifest");
    run_args.has_seed = rec_seed->count() > 0;
    run_args.has_start = rec_start->count() > 0;
    return run_recreation(run_args);
  }
  if (app.got_subcommand(bench)) return run_bench(bench_args);
  return usage_fail("no subcommand given");
}
