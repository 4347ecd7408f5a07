#include "recreation.hpp"

#include <sys/resource.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "crypto.hpp"
#include "errors.hpp"
#include "roster.hpp"
#include "stream.hpp"
#include "version.hpp"

namespace trafficforge {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_failure("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw io_failure("write failed for " + path.string());
}

std::string absolute_path(const std::string& path) {
  return fs::absolute(fs::path(path)).lexically_normal().string();
}

LogFormat format_from_name(const std::string& name) {
  LogFormat format;
  if (!log_format_from_name(name, format))
    throw config_violation("unknown log format \"" + name +
                           "\" (expected zeek-tsv or json-lines)");
  return format;
}

const char* data_ext(LogFormat format) {
  return format == LogFormat::JsonLines ? ".json" : ".log";
}

// Notes in the truth sidecar mention victim addresses in the clear
// ("victim=10.0.3.7").  When the policy anonymizes addresses, those tokens
// are rewritten with the same prefix-preserving mapping so the sidecar
// never undoes the log transform.
std::string rewrite_note_addrs(const std::string& note,
                               const RecordAnonymizer& anon) {
  static const std::string kTag = "victim=";
  std::string out;
  size_t pos = 0;
  while (true) {
    size_t hit = note.find(kTag, pos);
    if (hit == std::string::npos) {
      out.append(note, pos, std::string::npos);
      return out;
    }
    size_t addr_begin = hit + kTag.size();
    size_t addr_end = addr_begin;
    while (addr_end < note.size() &&
           (std::isdigit(static_cast<unsigned char>(note[addr_end])) ||
            note[addr_end] == '.' || note[addr_end] == ':')) {
      ++addr_end;
    }
    out.append(note, pos, addr_end - pos);
    std::string addr = note.substr(addr_begin, addr_end - addr_begin);
    IpAddr parsed;
    if (IpAddr::try_parse(addr, parsed)) {
      out.resize(out.size() - addr.size());
      out += anon.anonymize_ip(addr);
    }
    pos = addr_end;
  }
}

ManifestEntry digest_entry(const std::string& stored_path,
                           const std::string& real_path) {
  return ManifestEntry{stored_path, sha256_file_hex(real_path)};
}

}  // namespace

RecreationResult run_recreation(const RecreationOptions& options) {
  if (options.scenario_path.empty())
    throw usage_error("run_recreation needs a scenario path");
  if (options.out_dir.empty())
    throw usage_error("run_recreation needs an output directory");

  ScenarioConfig config = ScenarioConfig::load(options.scenario_path);
  if (options.seed_override) config.rng_seed = *options.seed_override;
  if (options.start_override) config.start_ts = *options.start_override;

  AnonymizationPolicy policy = options.policy_path.empty()
                                   ? AnonymizationPolicy::default_policy()
                                   : AnonymizationPolicy::load(options.policy_path);
  if (options.hash_hex_len > 0) policy.set_hash_hex_len(options.hash_hex_len);

  const FieldDirective* uid_dir = policy.find("uid");
  if (uid_dir == nullptr) throw policy_gap("policy has no directive for uid");
  if (uid_dir->action == FieldAction::Drop)
    throw config_violation(
        "policy drops uid, but recreation needs uid to join ground truth to "
        "the published stream");
  const FieldDirective* addr_dir = policy.find("id.orig_h");
  if (addr_dir == nullptr)
    throw policy_gap("policy has no directive for id.orig_h");
  const bool anon_addrs = addr_dir->action == FieldAction::Ip;

  // A natural log pins the output format; otherwise the caller's choice.
  LogFormat format = options.format;
  if (!options.natural_path.empty()) {
    ConnReader probe(options.natural_path);
    format = probe.format();
  }

  fs::path out_dir(options.out_dir);
  fs::path work_dir = out_dir / "work";
  fs::create_directories(work_dir);

  RecreationResult result;
  result.out_dir = out_dir.string();

  // 1. Simulate into the work area.
  SimulateResult sim = simulate_to_dir(config, work_dir.string(), format);
  result.sim_summary = sim.summary;

  // 2. Safety gate.  The report always lands in work/; nothing is published
  // past this point unless the sweep is clean.
  result.safety = verify_safety(sim.conn_path, config);
  write_text(work_dir / "safety.json", result.safety.to_json());
  if (!result.safety.ok()) {
    throw safety_violation(
        "generated stream violates containment (" +
        std::to_string(result.safety.violation_count) +
        " violation(s)); nothing published, details in " +
        (work_dir / "safety.json").string());
  }

  // 3. Fold in natural traffic (natural stream wins timestamp ties so the
  // background keeps its original relative order).
  std::string merged_path = sim.conn_path;
  if (!options.natural_path.empty()) {
    merged_path = (work_dir / (std::string("merged") + data_ext(format))).string();
    result.merge = merge_files(options.natural_path, sim.conn_path, merged_path);
  } else {
    result.merge.left_records = 0;
    result.merge.right_records = sim.summary.total_records;
    result.merge.out_records = sim.summary.total_records;
  }

  // 4. Anonymize the merged stream.
  KeySet keys(options.key);
  std::string anon_path =
      (work_dir / (std::string("anonymized") + data_ext(format))).string();
  AnonymizeOptions anon_options;
  anon_options.strict = false;
  anon_options.threads = options.threads;
  result.anonymize =
      anonymize_file(merged_path, anon_path, keys, policy, anon_options);

  // 5. Transform the truth sidecar under the same policy so its uids and
  // actors still join against the published stream.
  RecordAnonymizer rec_anon(keys, policy);
  fs::path truth_out = out_dir / "truth.jsonl";
  {
    LineReader truth_in(sim.truth_path);
    LineWriter truth_writer(truth_out.string(), Compression::None);
    std::string line;
    while (truth_in.next(line)) {
      if (line.empty()) continue;
      TruthRecord rec = parse_truth(line);
      if (uid_dir->action == FieldAction::Hash)
        rec.uid = rec_anon.anonymize_field(uid_dir->hash_class, rec.uid);
      if (anon_addrs) {
        rec.actor = rec_anon.anonymize_ip(rec.actor);
        rec.note = rewrite_note_addrs(rec.note, rec_anon);
      }
      truth_writer.write_line(serialize_truth(rec));
    }
    truth_writer.close();
  }
  result.truth_path = truth_out.string();

  // 6. Roster in the same address space as the published stream.
  Roster roster = Roster::from_scenario(config, anon_addrs ? &keys : nullptr);
  fs::path roster_out = out_dir / "roster.json";
  roster.save(roster_out.string());
  result.roster_path = roster_out.string();

  // 7. Label the anonymized stream, scoring against the transformed truth.
  Ruleset rules = options.rules_path.empty()
                      ? Ruleset::default_mirai(roster)
                      : Ruleset::load(options.rules_path);
  fs::path labeled_out = out_dir / (std::string("labeled") + data_ext(format));
  result.label_report = label_file(anon_path, labeled_out.string(), rules,
                                   roster, truth_out.string());
  result.labeled_path = labeled_out.string();

  // 8. Reports.
  result.stats = compute_stats(labeled_out.string());
  write_text(out_dir / "stats.json", result.stats.to_json());
  write_text(out_dir / "label_report.json", result.label_report.to_json());
  write_text(out_dir / "safety.json", result.safety.to_json());
  fs::copy_file(sim.summary_path, out_dir / "summary.json",
                fs::copy_options::overwrite_existing);

  // 9. Manifest, written last so it only ever describes a finished run.
  Manifest m;
  m.tool = kToolName;
  m.version = kVersion;
  m.command = "run-recreation";
  m.rng_seed = config.rng_seed;
  m.start_ts = config.start_ts;
  m.format = log_format_name(format);
  m.hash_hex_len = policy.hash_hex_len();
  m.key_fingerprint = options.key.fingerprint();

  auto add_input = [&m](const std::string& name, const std::string& path) {
    if (path.empty()) return;
    std::string abs = absolute_path(path);
    m.inputs[name] = digest_entry(abs, abs);
  };
  add_input("scenario", options.scenario_path);
  add_input("natural", options.natural_path);
  add_input("policy", options.policy_path);
  add_input("rules", options.rules_path);

  auto add_output = [&m, &out_dir](const std::string& name,
                                   const fs::path& path) {
    m.outputs[name] =
        digest_entry(path.lexically_relative(out_dir).string(), path.string());
  };
  add_output("labeled", labeled_out);
  add_output("truth", truth_out);
  add_output("roster", roster_out);
  add_output("summary", out_dir / "summary.json");
  add_output("safety", out_dir / "safety.json");
  add_output("label_report", out_dir / "label_report.json");
  add_output("stats", out_dir / "stats.json");

  fs::path manifest_out = out_dir / "manifest.json";
  m.save(manifest_out.string());
  result.manifest = m;
  result.manifest_path = manifest_out.string();
  return result;
}

RecreationResult run_from_manifest(const std::string& manifest_path,
                                   const MasterKey& key,
                                   const std::string& out_dir, int threads) {
  Manifest m = Manifest::load(manifest_path);
  if (m.tool != kToolName)
    throw config_violation("manifest was written by \"" + m.tool +
                           "\", not by " + kToolName);
  if (m.key_fingerprint != key.fingerprint())
    throw config_violation(
        "master key fingerprint mismatch: manifest expects " +
        m.key_fingerprint + ", provided key is " + key.fingerprint());

  fs::path base = fs::absolute(fs::path(manifest_path)).parent_path();
  auto resolve = [&base](const std::string& stored) {
    fs::path p(stored);
    if (p.is_relative()) p = base / p;
    return p.lexically_normal().string();
  };

  auto input_path = [&](const std::string& name) -> std::string {
    auto it = m.inputs.find(name);
    if (it == m.inputs.end()) return "";
    std::string path = resolve(it->second.path);
    std::string digest = sha256_file_hex(path);
    if (digest != it->second.sha256)
      throw config_violation("input \"" + name + "\" (" + path +
                             ") does not match its recorded digest");
    return path;
  };

  RecreationOptions options;
  options.scenario_path = input_path("scenario");
  if (options.scenario_path.empty())
    throw config_violation("manifest lists no scenario input");
  options.natural_path = input_path("natural");
  options.policy_path = input_path("policy");
  options.rules_path = input_path("rules");
  options.out_dir = out_dir;
  options.key = key;
  options.format = format_from_name(m.format);
  options.threads = threads;
  options.seed_override = m.rng_seed;
  options.start_override = m.start_ts;
  options.hash_hex_len = m.hash_hex_len;

  RecreationResult result = run_recreation(options);

  std::vector<std::string> diverged;
  for (const auto& [name, recorded] : m.outputs) {
    auto it = result.manifest.outputs.find(name);
    if (it == result.manifest.outputs.end() ||
        it->second.sha256 != recorded.sha256) {
      diverged.push_back(name);
    }
  }
  if (!diverged.empty()) {
    std::string names;
    for (const auto& n : diverged) {
      if (!names.empty()) names += ", ";
      names += n;
    }
    throw config_violation("replay diverged from the manifest: " + names);
  }
  return result;
}

std::string BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["records"] = records;
  j["single_seconds"] = single_seconds;
  j["single_rps"] = single_rps;
  j["parallel_threads"] = parallel_threads;
  j["parallel_seconds"] = parallel_seconds;
  j["parallel_rps"] = parallel_rps;
  j["maxrss_kb"] = maxrss_kb;
  return j.dump(2) + "\n";
}

BenchReport bench_anonymize(const std::string& in_path, const MasterKey& key,
                            const AnonymizationPolicy& policy, int threads) {
  KeySet keys(key);
  int parallel = threads > 0
                     ? threads
                     : static_cast<int>(
                           std::max(1u, std::thread::hardware_concurrency()));

  fs::path tmp = fs::temp_directory_path();
  std::string stamp = std::to_string(::getpid());
  fs::path out_single = tmp / ("tf-bench-" + stamp + "-single.tmp");
  fs::path out_parallel = tmp / ("tf-bench-" + stamp + "-parallel.tmp");

  BenchReport report;
  using clock = std::chrono::steady_clock;

  AnonymizeOptions single_opts;
  single_opts.threads = 1;
  auto t0 = clock::now();
  AnonymizeReport first =
      anonymize_file(in_path, out_single.string(), keys, policy, single_opts);
  report.single_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  report.records = first.records_out;
  report.single_rps =
      static_cast<double>(first.records_out) /
      std::max(report.single_seconds, 1e-9);

  AnonymizeOptions parallel_opts;
  parallel_opts.threads = parallel;
  auto t1 = clock::now();
  AnonymizeReport second = anonymize_file(in_path, out_parallel.string(), keys,
                                          policy, parallel_opts);
  report.parallel_seconds =
      std::chrono::duration<double>(clock::now() - t1).count();
  report.parallel_threads = parallel;
  report.parallel_rps = static_cast<double>(second.records_out) /
                        std::max(report.parallel_seconds, 1e-9);

  std::error_code ec;
  fs::remove(out_single, ec);
  fs::remove(out_parallel, ec);

  struct rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  report.maxrss_kb = usage.ru_maxrss;
  return report;
}

}  // namespace trafficforge
