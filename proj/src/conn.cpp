#include "conn.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace trafficforge {

namespace {

constexpr const char* kUnset = "-";
constexpr const char* kEmpty = "(empty)";

const char* kCanonicalNames[15] = {
    "ts",         "uid",        "id.orig_h", "id.orig_p", "id.resp_h",
    "id.resp_p",  "proto",      "service",   "duration",  "orig_bytes",
    "resp_bytes", "conn_state", "history",   "orig_pkts", "resp_pkts"};

const char* kCanonicalTypes[15] = {
    "time",  "string",   "addr",   "port",   "addr",
    "port",  "enum",     "string", "interval", "count",
    "count", "string",   "string", "count",  "count"};

int64_t parse_count(const std::string& tok) {
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE || v < 0)
    throw malformed_line("bad count value: " + tok);
  return v;
}

uint16_t parse_port(const std::string& tok) {
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || v < 0 || v > 65535)
    throw malformed_line("bad port value: " + tok);
  return static_cast<uint16_t>(v);
}

std::optional<std::string> decode_opt_string(const std::string& tok) {
  if (tok == kUnset) return std::nullopt;
  if (tok == kEmpty) return std::string();
  return tok;
}

std::string encode_opt_string(const std::optional<std::string>& v) {
  if (!v) return kUnset;
  if (v->empty()) return kEmpty;
  return *v;
}

std::string encode_opt_count(const std::optional<int64_t>& v) {
  if (!v) return kUnset;
  return std::to_string(*v);
}

}  // namespace

const char* proto_name(Proto p) {
  switch (p) {
    case Proto::Tcp: return "tcp";
    case Proto::Udp: return "udp";
    case Proto::Icmp: return "icmp";
  }
  return "tcp";
}

std::optional<Proto> proto_from_name(const std::string& name) {
  if (name == "tcp") return Proto::Tcp;
  if (name == "udp") return Proto::Udp;
  if (name == "icmp") return Proto::Icmp;
  return std::nullopt;
}

bool parse_ts_us(const std::string& text, int64_t& out) {
  if (text.empty() || text[0] == '-') return false;
  const char* p = text.c_str();
  char* end = nullptr;
  errno = 0;
  long long secs = std::strtoll(p, &end, 10);
  if (end == p || errno == ERANGE || secs < 0) return false;
  int64_t frac = 0;
  if (*end == '.') {
    ++end;
    int digits = 0;
    while (*end >= '0' && *end <= '9' && digits < 6) {
      frac = frac * 10 + (*end - '0');
      ++end;
      ++digits;
    }
    while (digits < 6) {
      frac *= 10;
      ++digits;
    }
    // Sub-microsecond digits are beyond stored precision; drop them.
    while (*end >= '0' && *end <= '9') ++end;
  }
  if (*end != '\0') return false;
  out = secs * 1000000 + frac;
  return true;
}

std::string format_ts_us(int64_t ts_us) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%" PRId64 ".%06" PRId64, ts_us / 1000000,
                ts_us % 1000000);
  return buf;
}

const char* log_format_name(LogFormat format) {
  return format == LogFormat::JsonLines ? "json-lines" : "zeek-tsv";
}

bool log_format_from_name(const std::string& name, LogFormat& out) {
  if (name == "zeek-tsv") {
    out = LogFormat::ZeekTsv;
    return true;
  }
  if (name == "json-lines") {
    out = LogFormat::JsonLines;
    return true;
  }
  return false;
}

LogSchema LogSchema::default_conn() {
  LogSchema s;
  s.fields.reserve(15);
  for (int i = 0; i < 15; ++i)
    s.fields.push_back({kCanonicalNames[i], kCanonicalTypes[i]});
  return s;
}

std::string zeek_type_for(const std::string& field_name) {
  for (int i = 0; i < 15; ++i)
    if (field_name == kCanonicalNames[i]) return kCanonicalTypes[i];
  return "string";
}

LogSchema LogSchema::from_field_names(const std::vector<std::string>& names) {
  LogSchema s;
  s.fields.reserve(names.size());
  for (const auto& n : names) s.fields.push_back({n, zeek_type_for(n)});
  return s;
}

LogSchema::Layout LogSchema::layout() const {
  Layout l;
  for (size_t i = 0; i < fields.size(); ++i) {
    const std::string& n = fields[i].name;
    int idx = static_cast<int>(i);
    if (n == "ts") l.ts = idx;
    else if (n == "uid") l.uid = idx;
    else if (n == "id.orig_h") l.orig_h = idx;
    else if (n == "id.orig_p") l.orig_p = idx;
    else if (n == "id.resp_h") l.resp_h = idx;
    else if (n == "id.resp_p") l.resp_p = idx;
    else if (n == "proto") l.proto = idx;
    else if (n == "service") l.service = idx;
    else if (n == "duration") l.duration = idx;
    else if (n == "orig_bytes") l.orig_bytes = idx;
    else if (n == "resp_bytes") l.resp_bytes = idx;
    else if (n == "conn_state") l.conn_state = idx;
    else if (n == "history") l.history = idx;
    else if (n == "orig_pkts") l.orig_pkts = idx;
    else if (n == "resp_pkts") l.resp_pkts = idx;
    else l.extra_columns.push_back(idx);
  }
  return l;
}

void LogSchema::validate_parseable() const {
  Layout l = layout();
  if (l.ts < 0 || l.uid < 0 || l.orig_h < 0 || l.orig_p < 0 || l.resp_h < 0 ||
      l.resp_p < 0 || l.proto < 0)
    throw unknown_format(
        "header lacks required conn fields (ts, uid, 5-tuple, proto)");
}

LogSchema LogSchema::with_appended(const std::string& name,
                                   const std::string& type) const {
  LogSchema s = *this;
  s.fields.push_back({name, type});
  return s;
}

std::vector<std::string> LogSchema::names() const {
  std::vector<std::string> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(f.name);
  return out;
}

ConnRecord parse_conn_tsv(const std::string& line, const LogSchema& schema,
                          const LogSchema::Layout& layout) {
  // Split in place; tabs never occur inside Zeek field values.
  std::vector<std::string> cols;
  cols.reserve(schema.fields.size());
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (cols.size() != schema.fields.size())
    throw malformed_line("expected " + std::to_string(schema.fields.size()) +
                         " columns, got " + std::to_string(cols.size()));

  ConnRecord r;
  if (!parse_ts_us(cols[static_cast<size_t>(layout.ts)], r.ts_us) ||
      r.ts_us <= 0)
    throw malformed_line("bad ts: " + cols[static_cast<size_t>(layout.ts)]);
  r.uid = cols[static_cast<size_t>(layout.uid)];
  if (r.uid.empty() || r.uid == kUnset)
    throw malformed_line("missing uid");
  try {
    r.orig_h = IpAddr::parse(cols[static_cast<size_t>(layout.orig_h)]);
    r.resp_h = IpAddr::parse(cols[static_cast<size_t>(layout.resp_h)]);
  } catch (const Error& e) {
    throw malformed_line(e.what());
  }
  r.orig_p = parse_port(cols[static_cast<size_t>(layout.orig_p)]);
  r.resp_p = parse_port(cols[static_cast<size_t>(layout.resp_p)]);
  auto proto = proto_from_name(cols[static_cast<size_t>(layout.proto)]);
  if (!proto)
    throw malformed_line("bad proto: " +
                         cols[static_cast<size_t>(layout.proto)]);
  r.proto = *proto;

  if (layout.service >= 0)
    r.service = decode_opt_string(cols[static_cast<size_t>(layout.service)]);
  if (layout.duration >= 0) {
    const std::string& tok = cols[static_cast<size_t>(layout.duration)];
    if (tok != kUnset) {
      int64_t d = 0;
      if (!parse_ts_us(tok, d)) throw malformed_line("bad duration: " + tok);
      r.duration_us = d;
    }
  }
  auto opt_count = [&cols](int idx) -> std::optional<int64_t> {
    const std::string& tok = cols[static_cast<size_t>(idx)];
    if (tok == kUnset) return std::nullopt;
    return parse_count(tok);
  };
  if (layout.orig_bytes >= 0) r.orig_bytes = opt_count(layout.orig_bytes);
  if (layout.resp_bytes >= 0) r.resp_bytes = opt_count(layout.resp_bytes);
  if (layout.conn_state >= 0)
    r.conn_state =
        decode_opt_string(cols[static_cast<size_t>(layout.conn_state)]);
  if (layout.history >= 0)
    r.history = decode_opt_string(cols[static_cast<size_t>(layout.history)]);
  if (layout.orig_pkts >= 0) r.orig_pkts = opt_count(layout.orig_pkts);
  if (layout.resp_pkts >= 0) r.resp_pkts = opt_count(layout.resp_pkts);

  for (int idx : layout.extra_columns)
    r.extras.emplace_back(schema.fields[static_cast<size_t>(idx)].name,
                          cols[static_cast<size_t>(idx)]);
  return r;
}

std::string serialize_conn_tsv(const ConnRecord& rec, const LogSchema& schema,
                               const LogSchema::Layout& layout) {
  std::vector<std::string> cols(schema.fields.size());
  auto put = [&cols](int idx, std::string v) {
    if (idx >= 0) cols[static_cast<size_t>(idx)] = std::move(v);
  };
  put(layout.ts, format_ts_us(rec.ts_us));
  put(layout.uid, rec.uid);
  put(layout.orig_h, rec.orig_h.to_string());
  put(layout.orig_p, std::to_string(rec.orig_p));
  put(layout.resp_h, rec.resp_h.to_string());
  put(layout.resp_p, std::to_string(rec.resp_p));
  put(layout.proto, proto_name(rec.proto));
  put(layout.service, encode_opt_string(rec.service));
  put(layout.duration,
      rec.duration_us ? format_ts_us(*rec.duration_us) : kUnset);
  put(layout.orig_bytes, encode_opt_count(rec.orig_bytes));
  put(layout.resp_bytes, encode_opt_count(rec.resp_bytes));
  put(layout.conn_state, encode_opt_string(rec.conn_state));
  put(layout.history, encode_opt_string(rec.history));
  put(layout.orig_pkts, encode_opt_count(rec.orig_pkts));
  put(layout.resp_pkts, encode_opt_count(rec.resp_pkts));

  // Extras matched by name; schema columns absent from the record emit "-".
  for (int idx : layout.extra_columns) {
    const std::string& name = schema.fields[static_cast<size_t>(idx)].name;
    std::string value = kUnset;
    for (const auto& [k, v] : rec.extras) {
      if (k == name) {
        value = v;
        break;
      }
    }
    cols[static_cast<size_t>(idx)] = std::move(value);
  }

  std::string out;
  size_t total = 0;
  for (const auto& c : cols) total += c.size() + 1;
  out.reserve(total);
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) out.push_back('\t');
    out += cols[i];
  }
  return out;
}

ConnRecord parse_conn_json(const std::string& line) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw malformed_line(std::string("bad json: ") + e.what());
  }
  if (!j.is_object()) throw malformed_line("json line is not an object");

  ConnRecord r;
  bool have_ts = false, have_uid = false, have_oh = false, have_op = false,
       have_rh = false, have_rp = false, have_proto = false;

  auto as_count = [](const nlohmann::ordered_json& v,
                     const char* what) -> int64_t {
    if (v.is_number_integer()) {
      int64_t n = v.get<int64_t>();
      if (n < 0) throw malformed_line(std::string("negative ") + what);
      return n;
    }
    if (v.is_number_unsigned()) return static_cast<int64_t>(v.get<uint64_t>());
    throw malformed_line(std::string("bad ") + what);
  };
  auto as_ts = [](const nlohmann::ordered_json& v,
                  const char* what) -> int64_t {
    int64_t out = 0;
    if (v.is_number()) {
      double d = v.get<double>();
      if (d < 0) throw malformed_line(std::string("negative ") + what);
      return static_cast<int64_t>(std::llround(d * 1e6));
    }
    if (v.is_string() && parse_ts_us(v.get<std::string>(), out)) return out;
    throw malformed_line(std::string("bad ") + what);
  };

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "ts") {
        r.ts_us = as_ts(v, "ts");
        have_ts = true;
      } else if (k == "uid") {
        r.uid = v.get<std::string>();
        have_uid = true;
      } else if (k == "id.orig_h") {
        r.orig_h = IpAddr::parse(v.get<std::string>());
        have_oh = true;
      } else if (k == "id.orig_p") {
        r.orig_p = static_cast<uint16_t>(as_count(v, "id.orig_p"));
        have_op = true;
      } else if (k == "id.resp_h") {
        r.resp_h = IpAddr::parse(v.get<std::string>());
        have_rh = true;
      } else if (k == "id.resp_p") {
        r.resp_p = static_cast<uint16_t>(as_count(v, "id.resp_p"));
        have_rp = true;
      } else if (k == "proto") {
        auto p = proto_from_name(v.get<std::string>());
        if (!p) throw malformed_line("bad proto");
        r.proto = *p;
        have_proto = true;
      } else if (k == "service") {
        r.service = v.get<std::string>();
      } else if (k == "duration") {
        r.duration_us = as_ts(v, "duration");
      } else if (k == "orig_bytes") {
        r.orig_bytes = as_count(v, "orig_bytes");
      } else if (k == "resp_bytes") {
        r.resp_bytes = as_count(v, "resp_bytes");
      } else if (k == "conn_state") {
        r.conn_state = v.get<std::string>();
      } else if (k == "history") {
        r.history = v.get<std::string>();
      } else if (k == "orig_pkts") {
        r.orig_pkts = as_count(v, "orig_pkts");
      } else if (k == "resp_pkts") {
        r.resp_pkts = as_count(v, "resp_pkts");
      } else {
        // Unknown key: keep as an extra in TSV surface encoding.
        std::string sv;
        if (v.is_string()) sv = v.get<std::string>();
        else if (v.is_boolean()) sv = v.get<bool>() ? "T" : "F";
        else if (v.is_null()) sv = kUnset;
        else sv = v.dump();
        if (v.is_string() && sv.empty()) sv = kEmpty;
        r.extras.emplace_back(k, std::move(sv));
      }
    } catch (const nlohmann::json::exception& e) {
      throw malformed_line("field " + k + ": " + e.what());
    } catch (const Error& e) {
      throw malformed_line("field " + k + ": " + e.what());
    }
  }
  if (!have_ts || !have_uid || !have_oh || !have_op || !have_rh || !have_rp ||
      !have_proto)
    throw malformed_line("json record lacks required conn fields");
  if (r.ts_us <= 0) throw malformed_line("bad ts");
  if (r.uid.empty()) throw malformed_line("missing uid");
  return r;
}

std::string serialize_conn_json(const ConnRecord& rec) {
  nlohmann::ordered_json j;
  j["ts"] = static_cast<double>(rec.ts_us) / 1e6;
  j["uid"] = rec.uid;
  j["id.orig_h"] = rec.orig_h.to_string();
  j["id.orig_p"] = rec.orig_p;
  j["id.resp_h"] = rec.resp_h.to_string();
  j["id.resp_p"] = rec.resp_p;
  j["proto"] = proto_name(rec.proto);
  if (rec.service) j["service"] = *rec.service;
  if (rec.duration_us)
    j["duration"] = static_cast<double>(*rec.duration_us) / 1e6;
  if (rec.orig_bytes) j["orig_bytes"] = *rec.orig_bytes;
  if (rec.resp_bytes) j["resp_bytes"] = *rec.resp_bytes;
  if (rec.conn_state) j["conn_state"] = *rec.conn_state;
  if (rec.history) j["history"] = *rec.history;
  if (rec.orig_pkts) j["orig_pkts"] = *rec.orig_pkts;
  if (rec.resp_pkts) j["resp_pkts"] = *rec.resp_pkts;
  for (const auto& [k, v] : rec.extras) {
    if (v == kUnset) continue;
    j[k] = (v == kEmpty) ? std::string() : v;
  }
  return j.dump();
}

ConnRecord parse_conn_line(const std::string& line) {
  static const LogSchema schema = LogSchema::default_conn();
  static const LogSchema::Layout layout = schema.layout();
  return parse_conn_tsv(line, schema, layout);
}

std::string serialize_conn(const ConnRecord& rec, LogFormat format) {
  if (format == LogFormat::JsonLines) return serialize_conn_json(rec);
  static const LogSchema schema = LogSchema::default_conn();
  static const LogSchema::Layout layout = schema.layout();
  return serialize_conn_tsv(rec, schema, layout);
}

std::string make_uid(uint64_t hi, uint64_t lo) {
  static const char alphabet[] =
      "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  char buf[18];
  buf[0] = 'C';
  for (int i = 1; i <= 9; ++i) {
    buf[i] = alphabet[hi % 62];
    hi /= 62;
  }
  for (int i = 10; i <= 17; ++i) {
    buf[i] = alphabet[lo % 62];
    lo /= 62;
  }
  return std::string(buf, 18);
}

}  // namespace trafficforge
