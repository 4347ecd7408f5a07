#include "stats.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "conn.hpp"
#include "stream.hpp"

namespace trafficforge {

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Straight HyperLogLog, 2^14 registers (~0.8% relative error).
class HyperLogLog {
 public:
  static constexpr int kBits = 14;
  static constexpr uint32_t kRegisters = 1u << kBits;

  HyperLogLog() : registers_(kRegisters, 0) {}

  void add_hash(uint64_t h) {
    uint32_t idx = static_cast<uint32_t>(h >> (64 - kBits));
    uint64_t rest = h << kBits;
    uint8_t rank = rest == 0 ? static_cast<uint8_t>(64 - kBits + 1)
                             : static_cast<uint8_t>(__builtin_clzll(rest) + 1);
    if (rank > registers_[idx]) registers_[idx] = rank;
  }

  uint64_t estimate() const {
    const double m = kRegisters;
    double alpha = 0.7213 / (1.0 + 1.079 / m);
    double sum = 0.0;
    uint32_t zeros = 0;
    for (uint8_t r : registers_) {
      sum += std::ldexp(1.0, -r);
      if (r == 0) ++zeros;
    }
    double estimate = alpha * m * m / sum;
    if (estimate <= 2.5 * m && zeros > 0)
      estimate = m * std::log(m / zeros);
    return static_cast<uint64_t>(std::llround(estimate));
  }

 private:
  std::vector<uint8_t> registers_;
};

// Days-since-epoch to civil date (proleptic Gregorian).
void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  auto doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  int64_t yy = static_cast<int64_t>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yy + (m <= 2 ? 1 : 0));
}

std::string day_string(int64_t day_index) {
  int y;
  unsigned m, d;
  civil_from_days(day_index, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  return q * b > a ? q - 1 : q;
}

}  // namespace

DatasetStats compute_stats(const std::string& in_path) {
  DatasetStats stats;
  std::map<int64_t, DatasetStats::DayBucket> days;

  constexpr size_t kExactCap = 65536;
  std::unordered_set<uint64_t> exact;
  HyperLogLog sketch;
  bool sketching = false;

  ConnReader reader(in_path);
  ConnRecord rec;
  while (reader.next(rec)) {
    ++stats.record_count;
    uint64_t bytes = 0;
    if (rec.orig_bytes && *rec.orig_bytes > 0)
      bytes += static_cast<uint64_t>(*rec.orig_bytes);
    if (rec.resp_bytes && *rec.resp_bytes > 0)
      bytes += static_cast<uint64_t>(*rec.resp_bytes);
    stats.total_bytes += bytes;

    uint64_t h = fnv1a64(rec.uid);
    if (sketching) {
      sketch.add_hash(h);
    } else {
      exact.insert(h);
      if (exact.size() >= kExactCap) {
        for (uint64_t stored : exact) sketch.add_hash(stored);
        exact.clear();
        sketching = true;
      }
    }

    auto& bucket = days[floor_div(rec.ts_us, 86400000000ll)];
    ++bucket.records;
    bucket.bytes += bytes;

    for (const auto& [name, value] : rec.extras)
      if (name == "attack_stage" && value != "-") {
        stats.has_labels = true;
        ++stats.label_counts[value];
      }
  }

  stats.distinct_approx = sketching;
  stats.distinct_conns = sketching ? sketch.estimate() : exact.size();
  for (auto& [index, bucket] : days) {
    bucket.day = day_string(index);
    stats.per_day.push_back(std::move(bucket));
  }
  return stats;
}

std::string DatasetStats::to_json() const {
  nlohmann::ordered_json j;
  j["record_count"] = record_count;
  j["total_bytes"] = total_bytes;
  j["distinct_conns"] = distinct_conns;
  j["distinct_approx"] = distinct_approx;
  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& bucket : per_day) {
    nlohmann::ordered_json b;
    b["day"] = bucket.day;
    b["records"] = bucket.records;
    b["bytes"] = bucket.bytes;
    series.push_back(std::move(b));
  }
  j["per_day"] = std::move(series);
  if (has_labels) {
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [label, n] : label_counts) counts[label] = n;
    j["label_counts"] = std::move(counts);
  }
  return j.dump(2) + "\n";
}

std::string DatasetStats::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %llu\n", "records",
                static_cast<unsigned long long>(record_count));
  out += line;
  std::snprintf(line, sizeof(line), "%-18s %llu\n", "total bytes",
                static_cast<unsigned long long>(total_bytes));
  out += line;
  std::snprintf(line, sizeof(line), "%-18s %llu%s\n", "distinct conns",
                static_cast<unsigned long long>(distinct_conns),
                distinct_approx ? " (approximate)" : "");
  out += line;
  if (!per_day.empty()) {
    out += "\nday          records          bytes\n";
    for (const auto& bucket : per_day) {
      std::snprintf(line, sizeof(line), "%-12s %-16llu %llu\n",
                    bucket.day.c_str(),
                    static_cast<unsigned long long>(bucket.records),
                    static_cast<unsigned long long>(bucket.bytes));
      out += line;
    }
  }
  if (has_labels) {
    out += "\nlabel              records\n";
    for (const auto& [label, n] : label_counts) {
      std::snprintf(line, sizeof(line), "%-18s %llu\n", label.c_str(),
                    static_cast<unsigned long long>(n));
      out += line;
    }
  }
  return out;
}

}  // namespace trafficforge
