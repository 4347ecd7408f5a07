#include "policy.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <thread>

#include "errors.hpp"

namespace trafficforge {

namespace {

// Actions that make sense per canonical conn field.  Addresses must stay
// addresses, required numeric/typed fields can only pass through, and the
// optional text fields take the full menu.
bool action_allowed(const std::string& field, FieldAction action) {
  if (action == FieldAction::Passthrough) return true;
  if (field == "ts" || field == "id.orig_p" || field == "id.resp_p" ||
      field == "proto")
    return false;
  if (field == "id.orig_h" || field == "id.resp_h")
    return action == FieldAction::Ip;
  if (field == "duration" || field == "orig_bytes" || field == "resp_bytes" ||
      field == "orig_pkts" || field == "resp_pkts")
    return action == FieldAction::Drop;
  if (field == "uid" || field == "service" || field == "conn_state" ||
      field == "history")
    return action == FieldAction::Hash || action == FieldAction::Drop;
  return true;  // non-canonical fields: validated against data at apply time
}

bool is_canonical(const std::string& field) {
  const auto& names = LogSchema::default_conn().names();
  for (const auto& n : names)
    if (n == field) return true;
  return false;
}

FieldDirective parse_directive(const std::string& field,
                               const std::string& text) {
  if (text == "passthrough") return {FieldAction::Passthrough, ""};
  if (text == "ip") return {FieldAction::Ip, ""};
  if (text == "drop") return {FieldAction::Drop, ""};
  if (text.rfind("hash:", 0) == 0) {
    std::string cls = text.substr(5);
    if (cls.empty())
      throw config_violation("policy for " + field +
                             ": hash directive needs a class, e.g. hash:uid");
    return {FieldAction::Hash, cls};
  }
  throw config_violation("policy for " + field + ": unknown directive \"" +
                         text + "\"");
}

}  // namespace

AnonymizationPolicy AnonymizationPolicy::default_policy() {
  AnonymizationPolicy p;
  for (const auto& name : LogSchema::default_conn().names())
    p.directives_[name] = {FieldAction::Passthrough, ""};
  p.directives_["id.orig_h"] = {FieldAction::Ip, ""};
  p.directives_["id.resp_h"] = {FieldAction::Ip, ""};
  p.directives_["uid"] = {FieldAction::Hash, "uid"};
  return p;
}

AnonymizationPolicy AnonymizationPolicy::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_violation(std::string("policy is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw config_violation("policy must be a JSON object");

  AnonymizationPolicy p = default_policy();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& field = it.key();
    if (field == "@ip_passthrough") {
      if (!it.value().is_array())
        throw config_violation("@ip_passthrough must be a list of CIDR strings");
      std::vector<Cidr> nets;
      for (const auto& entry : it.value()) {
        if (!entry.is_string())
          throw config_violation("@ip_passthrough entries must be strings");
        nets.push_back(Cidr::parse(entry.get<std::string>()));
      }
      p.set_ip_passthrough(std::move(nets));
      continue;
    }
    if (!field.empty() && field[0] == '@')
      throw config_violation("unknown policy option \"" + field + "\"");
    if (!it.value().is_string())
      throw config_violation("policy for " + field + " must be a string");
    p.set(field, parse_directive(field, it.value().get<std::string>()));
  }
  return p;
}

AnonymizationPolicy AnonymizationPolicy::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot open policy file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

void AnonymizationPolicy::set(const std::string& field,
                              FieldDirective directive) {
  if (is_canonical(field) && !action_allowed(field, directive.action)) {
    const char* verb = directive.action == FieldAction::Ip     ? "ip"
                       : directive.action == FieldAction::Hash ? "hash"
                                                               : "drop";
    throw config_violation("policy for " + field + ": directive \"" +
                           std::string(verb) +
                           "\" is incompatible with this field's type");
  }
  if (directive.action == FieldAction::Hash && directive.hash_class.empty())
    throw config_violation("policy for " + field + ": hash directive needs a class");
  directives_[field] = std::move(directive);
}

const FieldDirective* AnonymizationPolicy::find(const std::string& field) const {
  auto it = directives_.find(field);
  return it == directives_.end() ? nullptr : &it->second;
}

void AnonymizationPolicy::set_hash_hex_len(size_t n) {
  if (n < 8 || n > 64)
    throw config_violation("hash length must be between 8 and 64 hex chars");
  hash_hex_len_ = n;
}

RecordAnonymizer::RecordAnonymizer(const KeySet& keys,
                                   AnonymizationPolicy policy)
    : keys_(keys), policy_(std::move(policy)), prefix_(keys_) {
  prefix_.set_passthrough(policy_.ip_passthrough());
}

std::string RecordAnonymizer::anonymize_field(const std::string& value_class,
                                              const std::string& value) const {
  if (value == "-") return value;
  return keys_.hash_field(value_class, value, policy_.hash_hex_len());
}

namespace {

const FieldDirective& require_directive(const AnonymizationPolicy& policy,
                                        const std::string& field) {
  const FieldDirective* d = policy.find(field);
  if (!d)
    throw policy_gap("field \"" + field +
                     "\" has no directive; refusing to emit it");
  return *d;
}

void apply_text(const FieldDirective& d, const std::string& field,
                std::optional<std::string>& value, const RecordAnonymizer& anon) {
  switch (d.action) {
    case FieldAction::Passthrough:
      return;
    case FieldAction::Drop:
      value.reset();
      return;
    case FieldAction::Hash:
      if (value) *value = anon.anonymize_field(d.hash_class, *value);
      return;
    case FieldAction::Ip:
      throw config_violation("policy for " + field +
                             ": directive \"ip\" is incompatible with this "
                             "field's type");
  }
}

}  // namespace

ConnRecord RecordAnonymizer::anonymize(const ConnRecord& rec) const {
  ConnRecord out = rec;

  // Coverage of the canonical fields is guaranteed by construction (the
  // default policy names them all and directives cannot be removed), so the
  // lookups below cannot gap; extras are checked one by one.
  const auto& orig_h = require_directive(policy_, "id.orig_h");
  if (orig_h.action == FieldAction::Ip) out.orig_h = prefix_.anonymize(rec.orig_h);
  const auto& resp_h = require_directive(policy_, "id.resp_h");
  if (resp_h.action == FieldAction::Ip) out.resp_h = prefix_.anonymize(rec.resp_h);

  const auto& uid = require_directive(policy_, "uid");
  if (uid.action == FieldAction::Hash) {
    if (rec.uid != "-" && !rec.uid.empty())
      out.uid = keys_.hash_field(uid.hash_class, rec.uid, policy_.hash_hex_len());
  } else if (uid.action == FieldAction::Drop) {
    out.uid = "-";
  }

  apply_text(require_directive(policy_, "service"), "service", out.service, *this);
  apply_text(require_directive(policy_, "history"), "history", out.history, *this);

  apply_text(require_directive(policy_, "conn_state"), "conn_state",
             out.conn_state, *this);

  if (require_directive(policy_, "duration").action == FieldAction::Drop)
    out.duration_us.reset();
  if (require_directive(policy_, "orig_bytes").action == FieldAction::Drop)
    out.orig_bytes.reset();
  if (require_directive(policy_, "resp_bytes").action == FieldAction::Drop)
    out.resp_bytes.reset();
  if (require_directive(policy_, "orig_pkts").action == FieldAction::Drop)
    out.orig_pkts.reset();
  if (require_directive(policy_, "resp_pkts").action == FieldAction::Drop)
    out.resp_pkts.reset();

  for (auto& [name, value] : out.extras) {
    const FieldDirective& d = require_directive(policy_, name);
    switch (d.action) {
      case FieldAction::Passthrough:
        break;
      case FieldAction::Drop:
        value = "-";
        break;
      case FieldAction::Hash:
        if (value != "-")
          value = keys_.hash_field(d.hash_class, value == "(empty)" ? "" : value,
                                   policy_.hash_hex_len());
        break;
      case FieldAction::Ip:
        if (value != "-") value = prefix_.anonymize(value);
        break;
    }
  }

  return out;
}

namespace {

struct WorkerState {
  RecordAnonymizer anonymizer;
  uint64_t skipped = 0;
  std::exception_ptr failure;

  WorkerState(const KeySet& keys, const AnonymizationPolicy& policy)
      : anonymizer(keys, policy) {}
};

void run_slice(WorkerState& state, LogFormat format, const LogSchema& schema,
               const LogSchema::Layout& layout, std::vector<std::string>& lines,
               size_t begin, size_t end) {
  for (size_t i = begin; i < end; ++i) {
    try {
      ConnRecord rec = format == LogFormat::ZeekTsv
                           ? parse_conn_tsv(lines[i], schema, layout)
                           : parse_conn_json(lines[i]);
      rec = state.anonymizer.anonymize(rec);
      lines[i] = format == LogFormat::ZeekTsv
                     ? serialize_conn_tsv(rec, schema, layout)
                     : serialize_conn_json(rec);
    } catch (const Error& e) {
      if (e.name() == "malformed-line") {
        ++state.skipped;
        lines[i].clear();
      } else {
        state.failure = std::current_exception();
        return;
      }
    } catch (...) {
      state.failure = std::current_exception();
      return;
    }
  }
}

}  // namespace

AnonymizeReport anonymize_file(const std::string& in_path,
                               const std::string& out_path, const KeySet& keys,
                               const AnonymizationPolicy& policy,
                               const AnonymizeOptions& options) {
  ConnReader reader(in_path, {.strict = options.strict});
  AnonymizeReport report;

  // Fail closed before producing any output: the whole input schema must be
  // covered.  (JSON streams can still surface new fields mid-stream; those
  // are caught per record.)
  if (reader.format() == LogFormat::ZeekTsv)
    for (const auto& name : reader.schema().names())
      require_directive(policy, name);

  ConnWriter writer(out_path, reader.format(), compression_for_path(out_path),
                    reader.schema());

  int threads = options.threads;
  if (threads == 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }

  if (threads <= 1) {
    WorkerState state(keys, policy);
    ConnRecord rec;
    while (reader.next(rec)) {
      writer.write(state.anonymizer.anonymize(rec));
      ++report.records_out;
    }
    report.malformed_skipped = reader.malformed_skipped();
    report.records_in = reader.records_read() + reader.malformed_skipped();
    writer.close();
    return report;
  }

  std::vector<WorkerState> states;
  states.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) states.emplace_back(keys, policy);

  const size_t kBatch = 8192;
  std::vector<std::string> lines;
  lines.reserve(kBatch);
  bool more = true;
  while (more) {
    lines.clear();
    std::string line;
    while (lines.size() < kBatch && (more = reader.next_line(line)))
      lines.push_back(std::move(line));
    if (lines.empty()) break;
    report.records_in += lines.size();

    size_t per = (lines.size() + static_cast<size_t>(threads) - 1) /
                 static_cast<size_t>(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      size_t begin = static_cast<size_t>(t) * per;
      if (begin >= lines.size()) break;
      size_t end = std::min(lines.size(), begin + per);
      pool.emplace_back(run_slice, std::ref(states[static_cast<size_t>(t)]),
                        reader.format(), std::cref(reader.schema()),
                        std::cref(reader.layout()), std::ref(lines), begin, end);
    }
    for (auto& th : pool) th.join();
    for (auto& s : states)
      if (s.failure) std::rethrow_exception(s.failure);

    for (auto& out : lines)
      if (!out.empty()) {
        writer.write_serialized(out);
        ++report.records_out;
      }
  }

  for (auto& s : states) report.malformed_skipped += s.skipped;
  if (options.strict && report.malformed_skipped > 0)
    throw malformed_line("malformed records in strict mode");
  writer.close();
  return report;
}

}  // namespace trafficforge
