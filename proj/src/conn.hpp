#ifndef TRAFFICFORGE_CONN_HPP
#define TRAFFICFORGE_CONN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ip.hpp"

namespace trafficforge {

enum class Proto { Tcp, Udp, Icmp };

const char* proto_name(Proto p);
std::optional<Proto> proto_from_name(const std::string& name);

// One Zeek-style connection summary. Timestamps and durations are kept as
// integer microseconds so archive output is bit-exact across round trips.
// Optional fields distinguish unset ("-") from empty ("(empty)").
struct ConnRecord {
  int64_t ts_us = 0;
  std::string uid;
  IpAddr orig_h;
  uint16_t orig_p = 0;
  IpAddr resp_h;
  uint16_t resp_p = 0;
  Proto proto = Proto::Tcp;
  std::optional<std::string> service;
  std::optional<int64_t> duration_us;
  std::optional<int64_t> orig_bytes;
  std::optional<int64_t> resp_bytes;
  std::optional<std::string> conn_state;
  std::optional<std::string> history;
  std::optional<int64_t> orig_pkts;
  std::optional<int64_t> resp_pkts;

  // Columns beyond the standard schema, preserved verbatim in header order.
  // Values use the TSV surface encoding (so "-" stays the unset sentinel).
  std::vector<std::pair<std::string, std::string>> extras;

  bool operator==(const ConnRecord&) const = default;
};

// Decimal seconds with up to 6 fractional digits -> microseconds.
// Returns false on malformed input.
bool parse_ts_us(const std::string& text, int64_t& out);
// Fixed-point rendering with exactly 6 fractional digits.
std::string format_ts_us(int64_t ts_us);

enum class LogFormat { ZeekTsv, JsonLines };
enum class Compression { None, Gzip };

// Wire names for LogFormat: "zeek-tsv" / "json-lines".
const char* log_format_name(LogFormat format);
bool log_format_from_name(const std::string& name, LogFormat& out);

struct SchemaField {
  std::string name;
  std::string type;  // Zeek type tag for the #types line
  bool operator==(const SchemaField&) const = default;
};

// Ordered field list governing TSV column layout. The first 15 canonical
// conn fields are fixed; anything beyond is an extra carried opaquely.
struct LogSchema {
  std::vector<SchemaField> fields;

  static LogSchema default_conn();
  static LogSchema from_field_names(const std::vector<std::string>& names);

  // Index of each canonical field in this schema, -1 when absent.
  // Computed once per stream, reused per record.
  struct Layout {
    int ts = -1, uid = -1, orig_h = -1, orig_p = -1, resp_h = -1, resp_p = -1,
        proto = -1, service = -1, duration = -1, orig_bytes = -1,
        resp_bytes = -1, conn_state = -1, history = -1, orig_pkts = -1,
        resp_pkts = -1;
    std::vector<int> extra_columns;  // schema indexes of non-canonical fields
  };
  Layout layout() const;

  // Requires ts, uid, the 5-tuple and proto.
  void validate_parseable() const;

  LogSchema with_appended(const std::string& name,
                          const std::string& type) const;
  std::vector<std::string> names() const;

  bool operator==(const LogSchema&) const = default;
};

// Zeek default type tag for a known conn field; "string" otherwise.
std::string zeek_type_for(const std::string& field_name);

// One TSV data line -> record, under the given schema layout.
// Throws malformed_line on arity or value errors.
ConnRecord parse_conn_tsv(const std::string& line, const LogSchema& schema,
                          const LogSchema::Layout& layout);
// One JSON object line -> record. Unknown keys become extras (in key order).
ConnRecord parse_conn_json(const std::string& line);

std::string serialize_conn_tsv(const ConnRecord& rec, const LogSchema& schema,
                               const LogSchema::Layout& layout);
std::string serialize_conn_json(const ConnRecord& rec);

// Convenience single-record forms against the default schema.
ConnRecord parse_conn_line(const std::string& line);
std::string serialize_conn(const ConnRecord& rec, LogFormat format);

// Zeek-style connection id: "C" + 17 base-62 characters.
std::string make_uid(uint64_t hi, uint64_t lo);

}  // namespace trafficforge

#endif
