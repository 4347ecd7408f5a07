#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace trafficforge {

struct ManifestEntry {
  std::string path;    // inputs: as given; outputs: relative to the manifest
  std::string sha256;  // content digest, lowercase hex

  bool operator==(const ManifestEntry&) const = default;
};

// Reproducibility record for a full run: exactly which inputs (by digest),
// which key (by one-way fingerprint), which seed and settings produced which
// outputs.  Contains no timestamps and no key material, so identical runs
// write identical manifests.
struct Manifest {
  std::string tool;
  std::string version;
  std::string command;
  uint64_t rng_seed = 0;
  double start_ts = 0.0;
  std::string format;  // "zeek-tsv" or "json-lines"
  uint64_t hash_hex_len = 16;
  std::string key_fingerprint;
  std::map<std::string, ManifestEntry> inputs;
  std::map<std::string, ManifestEntry> outputs;

  std::string to_json() const;
  static Manifest from_json(const std::string& text);
  static Manifest load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace trafficforge
