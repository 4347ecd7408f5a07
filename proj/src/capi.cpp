#include "trafficforge.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "errors.hpp"
#include "keys.hpp"
#include "label.hpp"
#include "policy.hpp"
#include "recreation.hpp"
#include "roster.hpp"
#include "safety.hpp"
#include "scenario.hpp"
#include "sim.hpp"
#include "stats.hpp"
#include "stream.hpp"
#include "version.hpp"

using namespace trafficforge;

struct tf_keyset {
  KeySet keys;
};
struct tf_policy {
  AnonymizationPolicy policy;
};
struct tf_anonymizer {
  RecordAnonymizer anonymizer;
};
struct tf_scenario {
  ScenarioConfig config;
};
struct tf_roster {
  Roster roster;
};

namespace {

thread_local std::string g_last_error;

tf_status status_for(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::Usage:
      return TF_ERROR_USAGE;
    case ErrorCategory::Config:
      return TF_ERROR_CONFIG;
    case ErrorCategory::Safety:
      return TF_ERROR_SAFETY;
    case ErrorCategory::Io:
      return TF_ERROR_IO;
  }
  return TF_ERROR_IO;
}

template <typename Fn>
tf_status guarded(Fn&& fn) {
  try {
    fn();
    return TF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_for(e.category());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TF_ERROR_IO;
  } catch (...) {
    g_last_error = "unknown error";
    return TF_ERROR_IO;
  }
}

void require(const void* ptr, const char* what) {
  if (ptr == nullptr) throw usage_error(std::string(what) + " must not be NULL");
}

std::string opt_str(const char* s) { return s == nullptr ? std::string() : s; }

void copy_out(const std::string& value, char* buf, size_t cap) {
  require(buf, "output buffer");
  if (cap < value.size() + 1)
    throw usage_error("output buffer too small (" + std::to_string(cap) +
                      " bytes for " + std::to_string(value.size() + 1) + ")");
  std::memcpy(buf, value.data(), value.size());
  buf[value.size()] = '\0';
}

char* dup_string(const std::string& value) {
  char* out = static_cast<char*>(std::malloc(value.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, value.data(), value.size());
  out[value.size()] = '\0';
  return out;
}

LogFormat parse_format(const char* name) {
  if (name == nullptr || *name == '\0') return LogFormat::ZeekTsv;
  LogFormat format;
  if (!log_format_from_name(name, format))
    throw usage_error(std::string("unknown format \"") + name +
                      "\" (expected zeek-tsv or json-lines)");
  return format;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_failure("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw io_failure("write failed for " + path);
}

void fill_recreation_summary(const RecreationResult& result,
                             tf_recreation_summary* summary) {
  if (summary == nullptr) return;
  summary->generated_records = result.sim_summary.total_records;
  summary->final_infected = result.sim_summary.final_infected;
  summary->published_records = result.label_report.total_records;
  summary->coverage = result.label_report.coverage;
  summary->malformed_skipped =
      result.merge.malformed_skipped + result.anonymize.malformed_skipped;
}

RecreationOptions make_options(const tf_recreation_params* params,
                               const tf_keyset* keys) {
  require(params, "params");
  require(keys, "keys");
  require(params->scenario_path, "params->scenario_path");
  require(params->out_dir, "params->out_dir");
  RecreationOptions options;
  options.scenario_path = params->scenario_path;
  options.natural_path = opt_str(params->natural_path);
  options.policy_path = opt_str(params->policy_path);
  options.rules_path = opt_str(params->rules_path);
  options.out_dir = params->out_dir;
  options.key = keys->keys.master();
  options.format = parse_format(params->format);
  options.threads = params->threads;
  if (params->has_seed) options.seed_override = params->seed;
  if (params->has_start_ts) options.start_override = params->start_ts;
  options.hash_hex_len = static_cast<size_t>(params->hash_hex_len);
  return options;
}

}  // namespace

extern "C" {

const char* tf_version(void) { return kVersion; }

const char* tf_last_error(void) { return g_last_error.c_str(); }

void tf_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ keys */

tf_status tf_keygen(const char* out_path) {
  return guarded([&] {
    require(out_path, "out_path");
    MasterKey::generate().save(out_path);
  });
}

tf_status tf_keyset_open(const char* key_arg, tf_keyset** out) {
  return guarded([&] {
    require(out, "out");
    MasterKey master = MasterKey::resolve(opt_str(key_arg));
    *out = new tf_keyset{KeySet(master)};
  });
}

void tf_keyset_destroy(tf_keyset* keys) { delete keys; }

tf_status tf_keyset_fingerprint(const tf_keyset* keys, char* buf, size_t cap) {
  return guarded([&] {
    require(keys, "keys");
    copy_out(keys->keys.master().fingerprint(), buf, cap);
  });
}

/* ---------------------------------------------------------------- policy */

tf_status tf_policy_default(tf_policy** out) {
  return guarded([&] {
    require(out, "out");
    *out = new tf_policy{AnonymizationPolicy::default_policy()};
  });
}

tf_status tf_policy_load(const char* path, tf_policy** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tf_policy{AnonymizationPolicy::load(path)};
  });
}

tf_status tf_policy_set_hash_len(tf_policy* policy, size_t hex_len) {
  return guarded([&] {
    require(policy, "policy");
    policy->policy.set_hash_hex_len(hex_len);
  });
}

void tf_policy_destroy(tf_policy* policy) { delete policy; }

/* ----------------------------------------------------------- anonymizing */

tf_status tf_anonymizer_create(const tf_keyset* keys, const tf_policy* policy,
                               tf_anonymizer** out) {
  return guarded([&] {
    require(keys, "keys");
    require(policy, "policy");
    require(out, "out");
    *out = new tf_anonymizer{RecordAnonymizer(keys->keys, policy->policy)};
  });
}

void tf_anonymizer_destroy(tf_anonymizer* anon) { delete anon; }

tf_status tf_anonymize_ip(tf_anonymizer* anon, const char* addr, char* buf,
                          size_t cap) {
  return guarded([&] {
    require(anon, "anonymizer");
    require(addr, "addr");
    copy_out(anon->anonymizer.anonymize_ip(addr), buf, cap);
  });
}

tf_status tf_anonymize_field(tf_anonymizer* anon, const char* value_class,
                             const char* value, char* buf, size_t cap) {
  return guarded([&] {
    require(anon, "anonymizer");
    require(value_class, "value_class");
    require(value, "value");
    copy_out(anon->anonymizer.anonymize_field(value_class, value), buf, cap);
  });
}

tf_status tf_anonymize_file(const tf_keyset* keys, const tf_policy* policy,
                            const char* in_path, const char* out_path,
                            int strict, int threads,
                            tf_anonymize_report* report) {
  return guarded([&] {
    require(keys, "keys");
    require(policy, "policy");
    require(in_path, "in_path");
    require(out_path, "out_path");
    AnonymizeOptions options;
    options.strict = strict != 0;
    options.threads = threads;
    AnonymizeReport r =
        anonymize_file(in_path, out_path, keys->keys, policy->policy, options);
    if (report != nullptr) {
      report->records_in = r.records_in;
      report->records_out = r.records_out;
      report->malformed_skipped = r.malformed_skipped;
    }
  });
}

/* ------------------------------------------------------------- scenarios */

tf_status tf_scenario_load(const char* path, tf_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tf_scenario{ScenarioConfig::load(path)};
  });
}

void tf_scenario_destroy(tf_scenario* scenario) { delete scenario; }

tf_status tf_scenario_set_seed(tf_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    require(scenario, "scenario");
    scenario->config.rng_seed = seed;
  });
}

tf_status tf_scenario_set_start_ts(tf_scenario* scenario, double start_ts) {
  return guarded([&] {
    require(scenario, "scenario");
    scenario->config.start_ts = start_ts;
  });
}

tf_status tf_simulate(const tf_scenario* scenario, const char* out_dir,
                      const char* format, tf_sim_summary* summary) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out_dir, "out_dir");
    SimulateResult result =
        simulate_to_dir(scenario->config, out_dir, parse_format(format));
    if (summary != nullptr) {
      summary->rng_seed = result.summary.rng_seed;
      summary->duration = result.summary.duration;
      summary->start_ts = result.summary.start_ts;
      summary->pool_size = result.summary.pool_size;
      summary->total_records = result.summary.total_records;
      summary->final_infected = result.summary.final_infected;
    }
  });
}

tf_status tf_verify_safety(const char* conn_path, const tf_scenario* scenario,
                           const char* report_path,
                           tf_safety_summary* summary) {
  return guarded([&] {
    require(conn_path, "conn_path");
    require(scenario, "scenario");
    SafetyReport report = verify_safety(conn_path, scenario->config);
    if (report_path != nullptr) write_file(report_path, report.to_json());
    if (summary != nullptr) {
      summary->records_checked = report.records_checked;
      summary->violation_count = report.violation_count;
    }
  });
}

/* ----------------------------------------------------------------- merge */

tf_status tf_merge(const char* left_path, const char* right_path,
                   const char* out_path, tf_merge_report* report) {
  return guarded([&] {
    require(left_path, "left_path");
    require(right_path, "right_path");
    require(out_path, "out_path");
    MergeReport r = merge_files(left_path, right_path, out_path);
    if (report != nullptr) {
      report->left_records = r.left_records;
      report->right_records = r.right_records;
      report->out_records = r.out_records;
      report->malformed_skipped = r.malformed_skipped;
    }
  });
}

/* ---------------------------------------------------------------- roster */

tf_status tf_roster_from_scenario(const tf_scenario* scenario,
                                  const tf_keyset* keys, tf_roster** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    const KeySet* k = keys == nullptr ? nullptr : &keys->keys;
    *out = new tf_roster{Roster::from_scenario(scenario->config, k)};
  });
}

tf_status tf_roster_load(const char* path, tf_roster** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tf_roster{Roster::load(path)};
  });
}

tf_status tf_roster_save(const tf_roster* roster, const char* path) {
  return guarded([&] {
    require(roster, "roster");
    require(path, "path");
    roster->roster.save(path);
  });
}

void tf_roster_destroy(tf_roster* roster) { delete roster; }

/* -------------------------------------------------------------- labeling */

tf_status tf_label_file(const char* in_path, const char* out_path,
                        const tf_roster* roster, const char* rules_path,
                        const char* truth_path, const char* report_path,
                        tf_label_summary* summary) {
  return guarded([&] {
    require(in_path, "in_path");
    require(out_path, "out_path");
    require(roster, "roster");
    Ruleset rules = rules_path == nullptr
                        ? Ruleset::default_mirai(roster->roster)
                        : Ruleset::load(rules_path);
    LabelReport report = label_file(in_path, out_path, rules, roster->roster,
                                    opt_str(truth_path));
    if (report_path != nullptr) write_file(report_path, report.to_json());
    if (summary != nullptr) {
      summary->total_records = report.total_records;
      summary->coverage = report.coverage;
      summary->with_truth = report.with_truth ? 1 : 0;
    }
  });
}

/* ----------------------------------------------------------------- stats */

tf_status tf_stats_file(const char* in_path, char** json_out) {
  return guarded([&] {
    require(in_path, "in_path");
    require(json_out, "json_out");
    *json_out = dup_string(compute_stats(in_path).to_json());
  });
}

/* -------------------------------------------------------------- pipeline */

tf_status tf_run_recreation(const tf_recreation_params* params,
                            const tf_keyset* keys,
                            tf_recreation_summary* summary) {
  return guarded([&] {
    RecreationResult result = run_recreation(make_options(params, keys));
    fill_recreation_summary(result, summary);
  });
}

tf_status tf_run_from_manifest(const char* manifest_path,
                               const tf_keyset* keys, const char* out_dir,
                               int threads, tf_recreation_summary* summary) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(keys, "keys");
    require(out_dir, "out_dir");
    RecreationResult result = run_from_manifest(
        manifest_path, keys->keys.master(), out_dir, threads);
    fill_recreation_summary(result, summary);
  });
}

/* ----------------------------------------------------------------- bench */

tf_status tf_bench_anonymize(const char* in_path, const tf_keyset* keys,
                             const char* policy_path, int threads,
                             char** json_out) {
  return guarded([&] {
    require(in_path, "in_path");
    require(keys, "keys");
    require(json_out, "json_out");
    AnonymizationPolicy policy = policy_path == nullptr
                                     ? AnonymizationPolicy::default_policy()
                                     : AnonymizationPolicy::load(policy_path);
    BenchReport report =
        bench_anonymize(in_path, keys->keys.master(), policy, threads);
    *json_out = dup_string(report.to_json());
  });
}

} /* extern "C" */
