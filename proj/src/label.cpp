#include "label.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "errors.hpp"
#include "sim.hpp"
#include "stream.hpp"

namespace trafficforge {

namespace {

template <typename T>
bool hits(const std::vector<T>& allowed, const T& value) {
  if (allowed.empty()) return true;
  return std::find(allowed.begin(), allowed.end(), value) != allowed.end();
}

}  // namespace

bool LabelRule::matches(const ConnRecord& rec, const Roster& roster) const {
  Role orig = roster.role_of(rec.orig_h);
  Role resp = roster.role_of(rec.resp_h);
  if (!hits(orig_roles, orig)) return false;
  if (!hits(resp_roles, resp)) return false;
  if (!any_roles.empty() &&
      !(hits(any_roles, orig) || hits(any_roles, resp)))
    return false;
  if (!hits(resp_ports, rec.resp_p)) return false;
  if (!hits(protos, rec.proto)) return false;
  return true;
}

Ruleset Ruleset::default_mirai(const Roster& roster) {
  Ruleset set;
  LabelRule r;

  r = {};  // 1: nothing experiment-related on either side
  r.priority = 1;
  r.label = "NATURAL";
  r.orig_roles = {Role::None};
  r.resp_roles = {Role::None};
  set.add(r);

  r = {};  // 2: destination is the C2 server on its service port
  r.priority = 2;
  r.label = "C2";
  r.resp_roles = {Role::C2};
  r.resp_ports = {roster.c2_port};
  set.add(r);

  r = {};  // 3: destination is the report server on its service port
  r.priority = 3;
  r.label = "REPORT";
  r.resp_roles = {Role::Report};
  r.resp_ports = {roster.report_port};
  set.add(r);

  r = {};  // 4: pool node fetching from the loader
  r.priority = 4;
  r.label = "DOWNLOAD";
  r.resp_roles = {Role::Loader};
  r.resp_ports = {roster.loader_port};
  r.orig_roles = {Role::Pool, Role::Seed};
  set.add(r);

  r = {};  // 5: experiment node talking telnet anywhere
  r.priority = 5;
  r.label = "SCAN";
  r.orig_roles = {Role::Pool, Role::Seed};
  r.resp_ports = {23, 2323};
  set.add(r);

  r = {};  // 6: anything else touching the experiment nodes
  r.priority = 6;
  r.label = "GENERATED_BENIGN";
  r.any_roles = {Role::Pool, Role::Seed};
  set.add(r);

  r = {};  // 7: catch-all
  r.priority = 7;
  r.label = "UNLABELED";
  set.add(r);

  return set;
}

void Ruleset::add(LabelRule rule) {
  if (std::find(all_labels().begin(), all_labels().end(), rule.label) ==
      all_labels().end())
    throw config_violation("rule label \"" + rule.label + "\" is not a valid label");
  for (const auto& existing : rules_)
    if (existing.priority == rule.priority)
      throw config_violation("duplicate rule priority " +
                             std::to_string(rule.priority));
  auto pos = std::upper_bound(
      rules_.begin(), rules_.end(), rule,
      [](const LabelRule& a, const LabelRule& b) { return a.priority < b.priority; });
  rules_.insert(pos, std::move(rule));
}

const std::string& Ruleset::label_of(const ConnRecord& rec,
                                     const Roster& roster) const {
  for (const auto& rule : rules_)
    if (rule.matches(rec, roster)) return rule.label;
  static const std::string unlabeled = "UNLABELED";
  return unlabeled;
}

namespace {

std::vector<Role> parse_roles(const nlohmann::json& arr, const char* key) {
  if (!arr.is_array())
    throw config_violation(std::string(key) + " must be a list of role names");
  std::vector<Role> roles;
  for (const auto& entry : arr) {
    if (!entry.is_string())
      throw config_violation(std::string(key) + " entries must be strings");
    Role role;
    if (!role_from_name(entry.get<std::string>(), role))
      throw config_violation("unknown role \"" + entry.get<std::string>() +
                             "\" in " + key);
    roles.push_back(role);
  }
  return roles;
}

}  // namespace

Ruleset Ruleset::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_violation(std::string("ruleset is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array())
    throw config_violation("ruleset must be an object with a \"rules\" list");

  Ruleset set;
  for (const auto& entry : doc["rules"]) {
    if (!entry.is_object())
      throw config_violation("each rule must be an object");
    if (!entry.contains("priority") || !entry["priority"].is_number_integer())
      throw config_violation("each rule needs an integer priority");
    if (!entry.contains("label") || !entry["label"].is_string())
      throw config_violation("each rule needs a label string");
    LabelRule rule;
    rule.priority = entry["priority"].get<int>();
    rule.label = entry["label"].get<std::string>();
    if (entry.contains("match")) {
      const auto& m = entry["match"];
      if (!m.is_object()) throw config_violation("rule match must be an object");
      if (m.contains("orig_role")) rule.orig_roles = parse_roles(m["orig_role"], "orig_role");
      if (m.contains("resp_role")) rule.resp_roles = parse_roles(m["resp_role"], "resp_role");
      if (m.contains("any_role")) rule.any_roles = parse_roles(m["any_role"], "any_role");
      if (m.contains("resp_p")) {
        if (!m["resp_p"].is_array())
          throw config_violation("resp_p must be a list of ports");
        for (const auto& p : m["resp_p"]) {
          if (!p.is_number_integer() && !p.is_number_unsigned())
            throw config_violation("resp_p entries must be integers");
          auto port = p.get<int64_t>();
          if (port < 0 || port > 65535)
            throw config_violation("resp_p port out of range");
          rule.resp_ports.push_back(static_cast<uint16_t>(port));
        }
      }
      if (m.contains("proto")) {
        if (!m["proto"].is_array())
          throw config_violation("proto must be a list of protocol names");
        for (const auto& p : m["proto"]) {
          if (!p.is_string())
            throw config_violation("proto entries must be strings");
          std::string name = p.get<std::string>();
          if (name == "tcp") rule.protos.push_back(Proto::Tcp);
          else if (name == "udp") rule.protos.push_back(Proto::Udp);
          else if (name == "icmp") rule.protos.push_back(Proto::Icmp);
          else throw config_violation("unknown proto \"" + name + "\"");
        }
      }
    }
    set.add(std::move(rule));
  }
  if (set.rules().empty()) throw config_violation("ruleset has no rules");
  return set;
}

Ruleset Ruleset::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot open ruleset file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string LabelReport::to_json() const {
  nlohmann::ordered_json j;
  j["total_records"] = total_records;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& label : all_labels()) {
    auto it = label_counts.find(label);
    counts[label] = it == label_counts.end() ? 0 : it->second;
  }
  j["label_counts"] = std::move(counts);
  j["coverage"] = coverage;
  if (with_truth) {
    j["truth_records"] = truth_records;
    j["stage_errors"] = stage_errors;
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (const auto& [truth_stage, row] : confusion) {
      nlohmann::ordered_json cols = nlohmann::ordered_json::object();
      for (const auto& [label, n] : row) cols[label] = n;
      conf[truth_stage] = std::move(cols);
    }
    j["confusion"] = std::move(conf);
    nlohmann::ordered_json prec = nlohmann::ordered_json::object();
    for (const auto& [stage, v] : precision) prec[stage] = v;
    j["precision"] = std::move(prec);
    nlohmann::ordered_json rec = nlohmann::ordered_json::object();
    for (const auto& [stage, v] : recall) rec[stage] = v;
    j["recall"] = std::move(rec);
  }
  return j.dump(2) + "\n";
}

LabelReport label_file(const std::string& in_path, const std::string& out_path,
                       const Ruleset& rules, const Roster& roster,
                       const std::string& truth_path) {
  std::unordered_map<std::string, Stage> truth;
  if (!truth_path.empty()) {
    LineReader truth_in(truth_path);
    std::string line;
    while (truth_in.next(line)) {
      if (line.empty()) continue;
      TruthRecord rec = parse_truth(line);
      if (!truth.emplace(rec.uid, rec.stage).second)
        throw truth_mismatch("duplicate truth uid " + rec.uid);
    }
  }

  ConnReader reader(in_path);
  LogSchema out_schema = reader.schema();
  bool have_column = false;
  for (const auto& name : out_schema.names())
    if (name == "attack_stage") have_column = true;
  if (!have_column && reader.format() == LogFormat::ZeekTsv)
    out_schema = out_schema.with_appended("attack_stage", "string");
  LogSchema::Layout out_layout = out_schema.layout();

  ConnWriter writer(out_path, reader.format(), compression_for_path(out_path),
                    out_schema);

  LabelReport report;
  report.with_truth = !truth_path.empty();
  report.truth_records = truth.size();
  uint64_t truth_seen = 0;

  ConnRecord rec;
  while (reader.next(rec)) {
    const std::string& label = rules.label_of(rec, roster);

    bool replaced = false;
    for (auto& [name, value] : rec.extras)
      if (name == "attack_stage") {
        value = label;
        replaced = true;
      }
    if (!replaced) rec.extras.emplace_back("attack_stage", label);

    writer.write_serialized(reader.format() == LogFormat::ZeekTsv
                                ? serialize_conn_tsv(rec, out_schema, out_layout)
                                : serialize_conn_json(rec));

    ++report.total_records;
    ++report.label_counts[label];
    if (report.with_truth) {
      auto it = truth.find(rec.uid);
      std::string truth_stage = "NATURAL";
      if (it != truth.end()) {
        truth_stage = stage_name(it->second);
        ++truth_seen;
        if (label != truth_stage) ++report.stage_errors;
      }
      ++report.confusion[truth_stage][label];
    }
  }
  writer.close();

  if (report.total_records > 0) {
    uint64_t unlabeled = 0;
    if (auto it = report.label_counts.find("UNLABELED");
        it != report.label_counts.end())
      unlabeled = it->second;
    report.coverage = 1.0 - static_cast<double>(unlabeled) /
                                static_cast<double>(report.total_records);
  }

  if (report.with_truth) {
    if (truth_seen < truth.size())
      throw truth_mismatch(std::to_string(truth.size() - truth_seen) +
                           " truth uids never appeared in the stream");
    std::map<std::string, uint64_t> assigned_totals;
    std::map<std::string, uint64_t> truth_totals;
    std::map<std::string, uint64_t> diagonal;
    for (const auto& [truth_stage, row] : report.confusion)
      for (const auto& [label, n] : row) {
        assigned_totals[label] += n;
        truth_totals[truth_stage] += n;
        if (label == truth_stage) diagonal[truth_stage] += n;
      }
    for (const auto& [stage, total] : truth_totals) {
      uint64_t correct = diagonal.count(stage) ? diagonal[stage] : 0;
      report.recall[stage] =
          total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
      uint64_t assigned = assigned_totals.count(stage) ? assigned_totals[stage] : 0;
      report.precision[stage] =
          assigned == 0
              ? 1.0
              : static_cast<double>(correct) / static_cast<double>(assigned);
    }
  }

  return report;
}

}  // namespace trafficforge
