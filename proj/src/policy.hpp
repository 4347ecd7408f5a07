#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conn.hpp"
#include "ip.hpp"
#include "keys.hpp"
#include "prefix_anon.hpp"
#include "stream.hpp"

namespace trafficforge {

enum class FieldAction {
  Passthrough,  // copy unchanged
  Ip,           // prefix-preserving address anonymization
  Hash,         // keyed one-way hash under a named value class
  Drop,         // blank the value (column stays, value becomes unset)
};

struct FieldDirective {
  FieldAction action = FieldAction::Passthrough;
  std::string hash_class;  // set when action == Hash

  bool operator==(const FieldDirective&) const = default;
};

// Per-field transform policy.  The default policy anonymizes both addresses,
// hashes uid, and passes everything else in the standard conn schema through
// untouched; a policy file overlays directives on top of that.  Any field a
// record carries that the policy does not cover is a hard error at transform
// time — unknown data never passes through silently.
class AnonymizationPolicy {
 public:
  static AnonymizationPolicy default_policy();

  // Parse a JSON object {"field": "directive", ...} and overlay it on the
  // default policy.  Directives: "passthrough", "ip", "hash:<class>",
  // "drop".  The reserved key "@ip_passthrough" holds a list of CIDR
  // strings exempted from address anonymization.
  static AnonymizationPolicy from_json(const std::string& text);
  static AnonymizationPolicy load(const std::string& path);

  void set(const std::string& field, FieldDirective directive);
  const FieldDirective* find(const std::string& field) const;

  const std::map<std::string, FieldDirective>& directives() const {
    return directives_;
  }

  const std::vector<Cidr>& ip_passthrough() const { return ip_passthrough_; }
  void set_ip_passthrough(std::vector<Cidr> nets) {
    ip_passthrough_ = std::move(nets);
  }

  // Hex length of hash tokens (truncation of SHA-256 output).
  size_t hash_hex_len() const { return hash_hex_len_; }
  void set_hash_hex_len(size_t n);

  bool operator==(const AnonymizationPolicy&) const = default;

 private:
  std::map<std::string, FieldDirective> directives_;
  std::vector<Cidr> ip_passthrough_;
  size_t hash_hex_len_ = 16;
};

// Applies a policy to individual records.  Pure function of (record, keys,
// policy); instances are not thread-safe — one per worker thread.
class RecordAnonymizer {
 public:
  RecordAnonymizer(const KeySet& keys, AnonymizationPolicy policy);

  ConnRecord anonymize(const ConnRecord& rec) const;

  std::string anonymize_ip(const std::string& addr_text) const {
    return prefix_.anonymize(addr_text);
  }
  std::string anonymize_field(const std::string& value_class,
                              const std::string& value) const;

  const AnonymizationPolicy& policy() const { return policy_; }
  const KeySet& keys() const { return keys_; }

 private:
  KeySet keys_;
  AnonymizationPolicy policy_;
  PrefixAnonymizer prefix_;
};

struct AnonymizeOptions {
  bool strict = false;  // fail on malformed input instead of skip-and-count
  int threads = 1;      // 0 -> one per hardware thread
};

struct AnonymizeReport {
  uint64_t records_in = 0;
  uint64_t records_out = 0;
  uint64_t malformed_skipped = 0;
};

// Streaming whole-file anonymization.  Output format and schema match the
// input; compression follows the output path.  Record order is preserved
// even in parallel mode (batches are scattered to workers and written back
// in order).
AnonymizeReport anonymize_file(const std::string& in_path,
                               const std::string& out_path, const KeySet& keys,
                               const AnonymizationPolicy& policy,
                               const AnonymizeOptions& options = {});

}  // namespace trafficforge
