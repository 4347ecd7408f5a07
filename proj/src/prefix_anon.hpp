#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "crypto.hpp"
#include "ip.hpp"
#include "keys.hpp"

namespace trafficforge {

// Keyed prefix-preserving address anonymizer.
//
// Each output bit is the input bit XORed with a pseudorandom function of the
// strict prefix before it, so two addresses agree on exactly as many leading
// bits after anonymization as before, and the mapping is a bijection within
// each address family.  The PRF is AES-128: the first half of the per-family
// subkey keys the cipher and the second half (encrypted once) seeds the
// padding block that fills in past the prefix.
//
// IPv4 and IPv6 use independent subkeys and independent pads, so the two
// families never collide by construction.
//
// Instances are cheap to build from a KeySet and are not thread-safe; give
// each worker thread its own instance when anonymizing in parallel.
class PrefixAnonymizer {
 public:
  explicit PrefixAnonymizer(const KeySet& keys);

  // Addresses inside any passthrough network are returned unchanged.
  void set_passthrough(std::vector<Cidr> nets) { passthrough_ = std::move(nets); }
  const std::vector<Cidr>& passthrough() const { return passthrough_; }

  IpAddr anonymize(const IpAddr& addr) const;

  // Convenience: parse, anonymize, format.
  std::string anonymize(const std::string& addr_text) const;

 private:
  uint32_t anonymize_v4(uint32_t value) const;
  std::array<uint8_t, 16> anonymize_v6(const std::array<uint8_t, 16>& addr) const;

  mutable AesPrf prf4_;
  mutable AesPrf prf6_;
  std::array<uint8_t, 16> pad4_{};
  std::array<uint8_t, 16> pad6_{};
  uint32_t pad4_head_ = 0;  // first 32 bits of pad4_, host order

  // Bounded memo of full-address mappings; cleared when it hits the cap so
  // memory stays flat on arbitrarily large inputs.
  static constexpr size_t kMemoCap = 1u << 20;
  mutable std::unordered_map<uint32_t, uint32_t> memo4_;
  mutable std::map<std::array<uint8_t, 16>, std::array<uint8_t, 16>> memo6_;

  std::vector<Cidr> passthrough_;
};

}  // namespace trafficforge
