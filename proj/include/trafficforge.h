/* trafficforge — public C interface.
 *
 * Every function returns tf_status; TF_OK means success and anything else
 * maps directly onto the CLI exit codes.  On failure a human-readable
 * message is stored per thread and readable via tf_last_error() until the
 * next failing call on the same thread.  Handles are opaque; destroy
 * functions tolerate NULL.  Unless noted, string arguments are UTF-8 file
 * paths and may not be NULL.
 */

#ifndef TRAFFICFORGE_H
#define TRAFFICFORGE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tf_status {
  TF_OK = 0,
  TF_ERROR_USAGE = 2,  /* bad arguments / misuse of the API        */
  TF_ERROR_CONFIG = 3, /* invalid policy, scenario, roster, rules  */
  TF_ERROR_SAFETY = 4, /* generated traffic failed the safety gate */
  TF_ERROR_IO = 5,     /* unreadable, unparsable or unwritable data */
} tf_status;

/* Library version string, e.g. "1.0.0".  Static storage. */
const char* tf_version(void);

/* Message for the most recent failure on the calling thread ("" if none).
 * The pointer stays valid until the next failing call on this thread. */
const char* tf_last_error(void);

/* Frees strings returned through char** out-parameters. */
void tf_string_free(char* s);

/* ------------------------------------------------------------------ keys */

typedef struct tf_keyset tf_keyset;

/* Generates a fresh 256-bit master key from system entropy and writes it,
 * hex-encoded, to `out_path` (mode 0600). */
tf_status tf_keygen(const char* out_path);

/* Resolves a master key and derives the working key set.  `key_arg` may be
 * 64 hex digits, a path to a key file, or NULL/"" to fall back to the
 * TRAFFICFORGE_KEY environment variable (itself hex or a path). */
tf_status tf_keyset_open(const char* key_arg, tf_keyset** out);
void tf_keyset_destroy(tf_keyset* keys);

/* Hex identifier of the master key (16 hex chars + NUL), safe to log. */
tf_status tf_keyset_fingerprint(const tf_keyset* keys, char* buf, size_t cap);

/* ---------------------------------------------------------------- policy */

typedef struct tf_policy tf_policy;

/* The built-in policy: anonymize both addresses, hash uid, pass the rest
 * of the standard conn schema through. */
tf_status tf_policy_default(tf_policy** out);
/* Policy file overlaid on the built-in policy. */
tf_status tf_policy_load(const char* path, tf_policy** out);
/* Truncation length for hashed fields, 8..64 hex chars. */
tf_status tf_policy_set_hash_len(tf_policy* policy, size_t hex_len);
void tf_policy_destroy(tf_policy* policy);

/* ----------------------------------------------------------- anonymizing */

typedef struct tf_anonymizer tf_anonymizer;

/* Record-level transformer bound to a key set and policy.  Not thread-safe;
 * create one per thread.  The keyset/policy may be destroyed afterwards. */
tf_status tf_anonymizer_create(const tf_keyset* keys, const tf_policy* policy,
                               tf_anonymizer** out);
void tf_anonymizer_destroy(tf_anonymizer* anon);

/* Prefix-preserving address anonymization (IPv4 or IPv6 text form). */
tf_status tf_anonymize_ip(tf_anonymizer* anon, const char* addr, char* buf,
                          size_t cap);

/* Keyed field hash under a value class, truncated per the policy. */
tf_status tf_anonymize_field(tf_anonymizer* anon, const char* value_class,
                             const char* value, char* buf, size_t cap);

typedef struct tf_anonymize_report {
  uint64_t records_in;
  uint64_t records_out;
  uint64_t malformed_skipped;
} tf_anonymize_report;

/* Whole-file anonymization.  Format and schema follow the input; a ".gz"
 * output path gzips.  `strict` != 0 fails on malformed lines instead of
 * skipping them; `threads` 0 means one per hardware thread.  `report` may
 * be NULL. */
tf_status tf_anonymize_file(const tf_keyset* keys, const tf_policy* policy,
                            const char* in_path, const char* out_path,
                            int strict, int threads,
                            tf_anonymize_report* report);

/* ------------------------------------------------------------- scenarios */

typedef struct tf_scenario tf_scenario;

tf_status tf_scenario_load(const char* path, tf_scenario** out);
void tf_scenario_destroy(tf_scenario* scenario);

/* Override the configured RNG seed / trace start (epoch seconds). */
tf_status tf_scenario_set_seed(tf_scenario* scenario, uint64_t seed);
tf_status tf_scenario_set_start_ts(tf_scenario* scenario, double start_ts);

typedef struct tf_sim_summary {
  uint64_t rng_seed;
  double duration;
  double start_ts;
  uint64_t pool_size;
  uint64_t total_records;
  int final_infected;
} tf_sim_summary;

/* Runs the scenario and writes conn.log (or conn.json), truth.jsonl and
 * summary.json into `out_dir`.  `format` is "zeek-tsv", "json-lines" or
 * NULL for zeek-tsv.  `summary` may be NULL. */
tf_status tf_simulate(const tf_scenario* scenario, const char* out_dir,
                      const char* format, tf_sim_summary* summary);

typedef struct tf_safety_summary {
  uint64_t records_checked;
  uint64_t violation_count;
} tf_safety_summary;

/* Sweeps a generated stream for containment breaches against the scenario.
 * Returns TF_OK even when violations exist — inspect `summary`.  When
 * `report_path` is non-NULL the full JSON report is written there. */
tf_status tf_verify_safety(const char* conn_path, const tf_scenario* scenario,
                           const char* report_path,
                           tf_safety_summary* summary);

/* ----------------------------------------------------------------- merge */

typedef struct tf_merge_report {
  uint64_t left_records;
  uint64_t right_records;
  uint64_t out_records;
  uint64_t malformed_skipped;
} tf_merge_report;

/* Merges two time-sorted conn logs into one sorted stream (ties keep the
 * left stream first).  `report` may be NULL. */
tf_status tf_merge(const char* left_path, const char* right_path,
                   const char* out_path, tf_merge_report* report);

/* ---------------------------------------------------------------- roster */

typedef struct tf_roster tf_roster;

/* Builds the roster for a scenario.  With a non-NULL keyset the addresses
 * are anonymized, matching a stream transformed under the same keys. */
tf_status tf_roster_from_scenario(const tf_scenario* scenario,
                                  const tf_keyset* keys, tf_roster** out);
tf_status tf_roster_load(const char* path, tf_roster** out);
tf_status tf_roster_save(const tf_roster* roster, const char* path);
void tf_roster_destroy(tf_roster* roster);

/* -------------------------------------------------------------- labeling */

typedef struct tf_label_summary {
  uint64_t total_records;
  double coverage;  /* fraction of records with a non-UNLABELED stage */
  int with_truth;   /* 1 when a truth sidecar was scored */
} tf_label_summary;

/* Labels a stream with an "attack_stage" column.  `rules_path` NULL uses
 * the built-in ruleset for the roster; `truth_path` NULL skips accuracy
 * scoring; `report_path` non-NULL writes the JSON label report there.
 * `summary` may be NULL. */
tf_status tf_label_file(const char* in_path, const char* out_path,
                        const tf_roster* roster, const char* rules_path,
                        const char* truth_path, const char* report_path,
                        tf_label_summary* summary);

/* ----------------------------------------------------------------- stats */

/* Dataset statistics as a JSON document in `*json_out` (caller frees with
 * tf_string_free). */
tf_status tf_stats_file(const char* in_path, char** json_out);

/* -------------------------------------------------------------- pipeline */

typedef struct tf_recreation_params {
  const char* scenario_path; /* required */
  const char* natural_path;  /* optional natural background log */
  const char* policy_path;   /* optional, built-in policy if NULL */
  const char* rules_path;    /* optional, built-in ruleset if NULL */
  const char* out_dir;       /* required */
  const char* format;        /* "zeek-tsv" (default) or "json-lines" */
  int threads;               /* 0 -> one per hardware thread */
  int has_seed;
  uint64_t seed;
  int has_start_ts;
  double start_ts;
  uint64_t hash_hex_len;     /* 0 keeps the policy's length */
} tf_recreation_params;

typedef struct tf_recreation_summary {
  uint64_t generated_records;
  int final_infected;
  uint64_t published_records;
  double coverage;
  uint64_t malformed_skipped;
} tf_recreation_summary;

/* Full dataset build: simulate, safety-gate, merge, anonymize, label,
 * report, manifest.  Publishes into params->out_dir; raw intermediates go
 * to <out_dir>/work.  Returns TF_ERROR_SAFETY (publishing nothing) when
 * the generated stream violates containment.  `summary` may be NULL. */
tf_status tf_run_recreation(const tf_recreation_params* params,
                            const tf_keyset* keys,
                            tf_recreation_summary* summary);

/* Replays a manifest into `out_dir`: verifies the key fingerprint and all
 * input digests, re-runs, and fails with TF_ERROR_CONFIG if any output
 * digest differs from the recorded one. */
tf_status tf_run_from_manifest(const char* manifest_path,
                               const tf_keyset* keys, const char* out_dir,
                               int threads, tf_recreation_summary* summary);

/* ----------------------------------------------------------------- bench */

/* Times whole-file anonymization single-threaded and at `threads` (0 ->
 * one per hardware thread) and reports records/sec plus peak RSS as JSON
 * in `*json_out` (caller frees with tf_string_free). */
tf_status tf_bench_anonymize(const char* in_path, const tf_keyset* keys,
                             const char* policy_path, int threads,
                             char** json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TRAFFICFORGE_H */
