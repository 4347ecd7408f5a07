#include "stream.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace trafficforge {

struct LineReader::Impl {
  std::ifstream plain;
  gzFile gz = nullptr;
  std::string path;
  std::vector<char> gzbuf;

  ~Impl() {
    if (gz) gzclose(gz);
  }
};

LineReader::LineReader(const std::string& path) : impl_(new Impl) {
  impl_->path = path;
  FILE* probe = std::fopen(path.c_str(), "rb");
  if (!probe) throw io_failure("cannot open " + path);
  unsigned char magic[2] = {0, 0};
  size_t n = std::fread(magic, 1, 2, probe);
  std::fclose(probe);
  if (n == 2 && magic[0] == 0x1f && magic[1] == 0x8b) {
    compression_ = Compression::Gzip;
    impl_->gz = gzopen(path.c_str(), "rb");
    if (!impl_->gz) throw io_failure("cannot open " + path);
    gzbuffer(impl_->gz, 1 << 16);
    impl_->gzbuf.resize(1 << 16);
  } else {
    impl_->plain.open(path, std::ios::binary);
    if (!impl_->plain) throw io_failure("cannot open " + path);
  }
}

LineReader::~LineReader() = default;

bool LineReader::next(std::string& line) {
  if (impl_->gz) {
    line.clear();
    while (true) {
      char* got = gzgets(impl_->gz, impl_->gzbuf.data(),
                         static_cast<int>(impl_->gzbuf.size()));
      if (!got) {
        int errnum = 0;
        const char* msg = gzerror(impl_->gz, &errnum);
        if (errnum != Z_OK && errnum != Z_STREAM_END)
          throw io_failure("gzip read error on " + impl_->path + ": " + msg);
        return !line.empty();
      }
      size_t len = std::strlen(got);
      if (len > 0 && got[len - 1] == '\n') {
        line.append(got, len - 1);
        break;
      }
      line.append(got, len);
      if (len + 1 < impl_->gzbuf.size()) break;  // EOF without newline
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  if (!std::getline(impl_->plain, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

struct LineWriter::Impl {
  std::ofstream plain;
  gzFile gz = nullptr;
  std::string path;
  bool closed = false;
};

LineWriter::LineWriter(const std::string& path, Compression compression)
    : impl_(new Impl) {
  impl_->path = path;
  if (compression == Compression::Gzip) {
    impl_->gz = gzopen(path.c_str(), "wb");
    if (!impl_->gz) throw io_failure("cannot create " + path);
    gzbuffer(impl_->gz, 1 << 16);
  } else {
    impl_->plain.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->plain) throw io_failure("cannot create " + path);
  }
}

LineWriter::~LineWriter() {
  if (!impl_->closed && impl_->gz) gzclose(impl_->gz);
}

void LineWriter::write_line(const std::string& line) {
  if (impl_->gz) {
    if (gzwrite(impl_->gz, line.data(), static_cast<unsigned>(line.size())) <=
            0 &&
        !line.empty())
      throw sink_failure("gzip write failed on " + impl_->path);
    if (gzputc(impl_->gz, '\n') < 0)
      throw sink_failure("gzip write failed on " + impl_->path);
    return;
  }
  impl_->plain << line << '\n';
  if (!impl_->plain) throw sink_failure("write failed on " + impl_->path);
}

void LineWriter::close() {
  if (impl_->closed) return;
  impl_->closed = true;
  if (impl_->gz) {
    int rc = gzclose(impl_->gz);
    impl_->gz = nullptr;
    if (rc != Z_OK) throw sink_failure("gzip close failed on " + impl_->path);
  } else {
    impl_->plain.flush();
    if (!impl_->plain) throw sink_failure("flush failed on " + impl_->path);
    impl_->plain.close();
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = s.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

ConnReader::ConnReader(const std::string& path, Options options)
    : reader_(path), options_(options), schema_(LogSchema::default_conn()) {
  compression_ = reader_.compression();
  layout_ = schema_.layout();

  std::string line;
  bool saw_header = false;
  std::vector<std::string> names;
  std::vector<std::string> types;
  while (reader_.next(line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      saw_header = true;
      if (line.rfind("#fields\t", 0) == 0) {
        auto cols = split_tabs(line);
        names.assign(cols.begin() + 1, cols.end());
      } else if (line.rfind("#types\t", 0) == 0) {
        auto cols = split_tabs(line);
        types.assign(cols.begin() + 1, cols.end());
      }
      continue;
    }
    pending_ = line;
    break;
  }

  if (saw_header) {
    format_ = LogFormat::ZeekTsv;
    if (names.empty())
      throw unknown_format("zeek-tsv header block lacks a #fields line");
    schema_ = LogSchema::from_field_names(names);
    if (types.size() == names.size())
      for (size_t i = 0; i < types.size(); ++i)
        schema_.fields[i].type = types[i];
    schema_.validate_parseable();
    layout_ = schema_.layout();
  } else if (pending_ && !pending_->empty() && (*pending_)[0] == '{') {
    format_ = LogFormat::JsonLines;
  } else if (pending_) {
    throw unknown_format("input is neither zeek-tsv nor json-lines");
  } else {
    // Empty file: a valid stream with zero records.
    done_ = true;
  }
}

ConnReader::~ConnReader() = default;

bool ConnReader::next_line(std::string& line) {
  if (done_) return false;
  while (true) {
    if (pending_) {
      line = std::move(*pending_);
      pending_.reset();
    } else if (!reader_.next(line)) {
      done_ = true;
      return false;
    }
    if (line.empty()) continue;
    if (line[0] == '#') {
      // Concatenated logs: a fresh header block may restate the schema.
      if (format_ == LogFormat::ZeekTsv && line.rfind("#fields\t", 0) == 0) {
        auto cols = split_tabs(line);
        std::vector<std::string> names(cols.begin() + 1, cols.end());
        schema_ = LogSchema::from_field_names(names);
        schema_.validate_parseable();
        layout_ = schema_.layout();
      }
      continue;
    }
    return true;
  }
}

bool ConnReader::next(ConnRecord& rec) {
  std::string line;
  while (next_line(line)) {
    try {
      rec = (format_ == LogFormat::ZeekTsv)
                ? parse_conn_tsv(line, schema_, layout_)
                : parse_conn_json(line);
      ++records_;
      return true;
    } catch (const Error& e) {
      if (options_.strict || e.name() != "malformed-line") throw;
      ++skipped_;
    }
  }
  return false;
}

ConnWriter::ConnWriter(const std::string& path, LogFormat format,
                       Compression compression, const LogSchema& schema)
    : writer_(path, compression),
      format_(format),
      schema_(schema),
      layout_(schema.layout()) {
  if (format_ == LogFormat::ZeekTsv) {
    writer_.write_line("#separator \\x09");
    writer_.write_line("#set_separator\t,");
    writer_.write_line("#empty_field\t(empty)");
    writer_.write_line("#unset_field\t-");
    writer_.write_line("#path\tconn");
    std::string fields = "#fields";
    std::string types = "#types";
    for (const auto& f : schema_.fields) {
      fields += '\t' + f.name;
      types += '\t' + f.type;
    }
    writer_.write_line(fields);
    writer_.write_line(types);
  }
}

ConnWriter::~ConnWriter() {
  try {
    close();
  } catch (...) {
    // Destructor swallows close errors; call close() to observe them.
  }
}

void ConnWriter::write(const ConnRecord& rec) {
  write_serialized(format_ == LogFormat::ZeekTsv
                       ? serialize_conn_tsv(rec, schema_, layout_)
                       : serialize_conn_json(rec));
}

void ConnWriter::write_serialized(const std::string& line) {
  writer_.write_line(line);
  ++records_;
}

void ConnWriter::close() {
  if (closed_) return;
  closed_ = true;
  if (format_ == LogFormat::ZeekTsv) writer_.write_line("#close");
  writer_.close();
}

Compression compression_for_path(const std::string& path) {
  return path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0
             ? Compression::Gzip
             : Compression::None;
}

LogFormat format_for_path(const std::string& path) {
  return path.find(".json") != std::string::npos ? LogFormat::JsonLines
                                                 : LogFormat::ZeekTsv;
}

}  // namespace trafficforge
