#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "crypto.hpp"

namespace trafficforge {

// A 256-bit master secret.  Everything key-dependent in the anonymizer is
// derived from this one value, so two runs agree byte-for-byte exactly when
// their master keys agree.
struct MasterKey {
  Digest256 bytes{};

  // Fresh key from the system entropy source.
  static MasterKey generate();

  // Parse 64 hex characters (surrounding whitespace tolerated).
  static MasterKey from_hex(const std::string& hex);

  // Read a key file as written by save().
  static MasterKey load(const std::string& path);

  // Resolve --key / TRAFFICFORGE_KEY / key file, in that order of
  // precedence.  `key_arg` may be inline hex or a path to a key file.
  static MasterKey resolve(const std::string& key_arg);

  // Write hex + newline with owner-only permissions.
  void save(const std::string& path) const;

  std::string to_hex() const { return trafficforge::to_hex(bytes.data(), bytes.size()); }

  // Short identifier safe to put in manifests and logs: first 8 bytes of
  // SHA-256 over the key bytes, hex.  Never exposes the key itself.
  std::string fingerprint() const;
};

// Derives and caches the per-purpose subkeys.  Each subkey is
// HMAC-SHA256(master, label) for a fixed label, so distinct purposes see
// independent keys and adding a purpose never disturbs existing ones.
class KeySet {
 public:
  explicit KeySet(MasterKey master) : master_(master) {}

  const MasterKey& master() const { return master_; }

  // Address anonymization subkeys, one per family.
  const Digest256& ipv4_key() const;
  const Digest256& ipv6_key() const;

  // Field-hashing subkey for a named value class ("uid", "host", ...).
  const Digest256& field_key(const std::string& value_class) const;

  // Keyed field hash: hex prefix of SHA-256(subkey || value).
  std::string hash_field(const std::string& value_class, const std::string& value,
                         size_t hex_len) const;

 private:
  MasterKey master_;
  mutable std::array<Digest256, 2> ip_keys_{};
  mutable std::array<bool, 2> ip_ready_{};
  mutable std::map<std::string, Digest256> field_keys_;
};

}  // namespace trafficforge
