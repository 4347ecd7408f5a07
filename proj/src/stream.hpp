#ifndef TRAFFICFORGE_STREAM_HPP
#define TRAFFICFORGE_STREAM_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "conn.hpp"

namespace trafficforge {

// Line source over a plain or gzip file, detected by magic bytes.
// Constant memory: one line buffer, no whole-file reads.
class LineReader {
public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // False at end of stream. Strips the trailing newline.
  bool next(std::string& line);
  Compression compression() const { return compression_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Compression compression_ = Compression::None;
};

class LineWriter {
public:
  LineWriter(const std::string& path, Compression compression);
  ~LineWriter();
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void write_line(const std::string& line);
  void close();  // flushes; throws on failure

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Sequential record cursor over a conn log file. Format (zeek-tsv vs
// json-lines) and compression are auto-detected from the first bytes.
class ConnReader {
public:
  struct Options {
    bool strict = false;  // abort on malformed lines instead of skipping
  };

  explicit ConnReader(const std::string& path)
      : ConnReader(path, Options()) {}
  ConnReader(const std::string& path, Options options);
  ~ConnReader();

  // False at end of stream.
  bool next(ConnRecord& rec);

  LogFormat format() const { return format_; }
  Compression compression() const { return compression_; }
  const LogSchema& schema() const { return schema_; }
  const LogSchema::Layout& layout() const { return layout_; }
  uint64_t records_read() const { return records_; }
  uint64_t malformed_skipped() const { return skipped_; }

  // Raw access used by transform passes that re-serialize every line:
  // returns data lines only (header/trailer lines are consumed internally).
  bool next_line(std::string& line);

private:
  LineReader reader_;
  Options options_;
  LogFormat format_ = LogFormat::ZeekTsv;
  Compression compression_ = Compression::None;
  LogSchema schema_;
  LogSchema::Layout layout_;
  std::optional<std::string> pending_;  // first data line, read during probe
  bool done_ = false;
  uint64_t records_ = 0;
  uint64_t skipped_ = 0;
};

class ConnWriter {
public:
  ConnWriter(const std::string& path, LogFormat format,
             Compression compression, const LogSchema& schema);
  ~ConnWriter();

  void write(const ConnRecord& rec);
  void write_serialized(const std::string& line);  // pre-rendered data line
  void close();
  uint64_t records_written() const { return records_; }
  const LogSchema& schema() const { return schema_; }

private:
  LineWriter writer_;
  LogFormat format_;
  LogSchema schema_;
  LogSchema::Layout layout_;
  bool closed_ = false;
  uint64_t records_ = 0;
};

// Picks gzip when the path ends in ".gz".
Compression compression_for_path(const std::string& path);
// Picks json-lines when the path contains ".json" or ".jsonl".
LogFormat format_for_path(const std::string& path);

}  // namespace trafficforge

#endif
