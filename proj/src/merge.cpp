#include "merge.hpp"

#include <memory>

#include "conn.hpp"
#include "errors.hpp"
#include "stream.hpp"

namespace trafficforge {

namespace {

// One input stream with a single parsed record of lookahead.  Keeps the raw
// line alongside the parse so the fast path can copy bytes through.
struct Cursor {
  ConnReader reader;
  std::string label;
  bool has = false;
  ConnRecord rec;
  std::string raw;
  int64_t prev_ts = INT64_MIN;
  uint64_t records = 0;
  uint64_t skipped = 0;

  Cursor(const std::string& path)
      : reader(path), label(path) {}

  void advance() {
    std::string line;
    while (reader.next_line(line)) {
      try {
        rec = reader.format() == LogFormat::ZeekTsv
                  ? parse_conn_tsv(line, reader.schema(), reader.layout())
                  : parse_conn_json(line);
      } catch (const Error& e) {
        if (e.name() != "malformed-line") throw;
        ++skipped;
        continue;
      }
      if (rec.ts_us < prev_ts)
        throw unsorted_input(label + " is not time-sorted (record " +
                             rec.uid + " moves backwards)");
      prev_ts = rec.ts_us;
      raw = std::move(line);
      has = true;
      ++records;
      return;
    }
    has = false;
  }

  // Global order: (ts, uid).
  bool before(const Cursor& other) const {
    if (rec.ts_us != other.rec.ts_us) return rec.ts_us < other.rec.ts_us;
    return rec.uid < other.rec.uid;
  }
};

}  // namespace

MergeReport merge_files(const std::string& left_path,
                        const std::string& right_path,
                        const std::string& out_path) {
  Cursor left(left_path);
  Cursor right(right_path);
  left.advance();
  right.advance();

  // A stream with zero records contributes neither schema nor format, so
  // merging with an empty file is an identity operation.
  LogFormat out_format = left.has ? left.reader.format()
                        : right.has ? right.reader.format()
                                    : LogFormat::ZeekTsv;

  LogSchema schema = LogSchema::default_conn();
  if (left.has && right.has) {
    schema = left.reader.schema();
    const auto known = schema.names();
    for (const auto& field : right.reader.schema().fields) {
      bool present = false;
      for (const auto& name : known)
        if (name == field.name) present = true;
      if (!present) schema = schema.with_appended(field.name, field.type);
    }
  } else if (left.has) {
    schema = left.reader.schema();
  } else if (right.has) {
    schema = right.reader.schema();
  }
  LogSchema::Layout layout = schema.layout();

  auto passthrough = [&](const Cursor& c) {
    return c.reader.format() == out_format &&
           (out_format == LogFormat::JsonLines ||
            c.reader.schema().names() == schema.names());
  };
  bool raw_left = left.has && passthrough(left);
  bool raw_right = right.has && passthrough(right);

  ConnWriter writer(out_path, out_format, compression_for_path(out_path),
                    schema);
  MergeReport report;

  auto emit = [&](Cursor& c, bool raw_ok) {
    if (raw_ok) {
      writer.write_serialized(c.raw);
    } else {
      writer.write_serialized(out_format == LogFormat::ZeekTsv
                                  ? serialize_conn_tsv(c.rec, schema, layout)
                                  : serialize_conn_json(c.rec));
    }
    ++report.out_records;
    c.advance();
  };

  while (left.has || right.has) {
    if (!right.has || (left.has && !right.before(left)))
      emit(left, raw_left);
    else
      emit(right, raw_right);
  }

  writer.close();
  report.left_records = left.records;
  report.right_records = right.records;
  report.malformed_skipped = left.skipped + right.skipped;
  return report;
}

}  // namespace trafficforge
