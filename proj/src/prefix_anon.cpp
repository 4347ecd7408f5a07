#include "prefix_anon.hpp"

#include <cstring>

namespace trafficforge {

namespace {

AesPrf make_prf(const Digest256& subkey) {
  return AesPrf(subkey.data());
}

std::array<uint8_t, 16> make_pad(AesPrf& prf, const Digest256& subkey) {
  std::array<uint8_t, 16> pad{};
  prf.encrypt_blocks(subkey.data() + 16, pad.data(), 1);
  return pad;
}

}  // namespace

PrefixAnonymizer::PrefixAnonymizer(const KeySet& keys)
    : prf4_(make_prf(keys.ipv4_key())), prf6_(make_prf(keys.ipv6_key())) {
  pad4_ = make_pad(prf4_, keys.ipv4_key());
  pad6_ = make_pad(prf6_, keys.ipv6_key());
  pad4_head_ = (uint32_t(pad4_[0]) << 24) | (uint32_t(pad4_[1]) << 16) |
               (uint32_t(pad4_[2]) << 8) | uint32_t(pad4_[3]);
}

uint32_t PrefixAnonymizer::anonymize_v4(uint32_t value) const {
  if (auto it = memo4_.find(value); it != memo4_.end()) return it->second;

  // One PRF input block per prefix length 0..31: the first i bits come from
  // the address, everything after them from the pad.
  uint8_t blocks[32 * 16];
  for (int i = 0; i < 32; ++i) {
    uint8_t* block = blocks + i * 16;
    std::memcpy(block, pad4_.data(), 16);
    uint32_t mask = i == 0 ? 0u : ~uint32_t(0) << (32 - i);
    uint32_t head = (value & mask) | (pad4_head_ & ~mask);
    block[0] = uint8_t(head >> 24);
    block[1] = uint8_t(head >> 16);
    block[2] = uint8_t(head >> 8);
    block[3] = uint8_t(head);
  }
  uint8_t out[32 * 16];
  prf4_.encrypt_blocks(blocks, out, 32);

  uint32_t flips = 0;
  for (int i = 0; i < 32; ++i)
    flips |= uint32_t(out[i * 16] >> 7) << (31 - i);
  uint32_t result = value ^ flips;

  if (memo4_.size() >= kMemoCap) memo4_.clear();
  memo4_.emplace(value, result);
  return result;
}

std::array<uint8_t, 16> PrefixAnonymizer::anonymize_v6(
    const std::array<uint8_t, 16>& addr) const {
  if (auto it = memo6_.find(addr); it != memo6_.end()) return it->second;

  std::vector<uint8_t> blocks(128 * 16);
  for (int i = 0; i < 128; ++i) {
    uint8_t* block = blocks.data() + i * 16;
    std::memcpy(block, pad6_.data(), 16);
    int full = i / 8;
    int rem = i % 8;
    std::memcpy(block, addr.data(), size_t(full));
    if (rem) {
      uint8_t mask = uint8_t(0xff << (8 - rem));
      block[full] = uint8_t((addr[size_t(full)] & mask) | (block[full] & ~mask));
    }
  }
  std::vector<uint8_t> out(128 * 16);
  prf6_.encrypt_blocks(blocks.data(), out.data(), 128);

  std::array<uint8_t, 16> result = addr;
  for (int i = 0; i < 128; ++i)
    result[size_t(i / 8)] ^= uint8_t((out[size_t(i) * 16] >> 7) << (7 - i % 8));

  if (memo6_.size() >= kMemoCap) memo6_.clear();
  memo6_.emplace(addr, result);
  return result;
}

IpAddr PrefixAnonymizer::anonymize(const IpAddr& addr) const {
  for (const auto& net : passthrough_)
    if (net.contains(addr)) return addr;
  if (addr.family() == 4) return IpAddr::v4(anonymize_v4(addr.v4_value()));
  return IpAddr::v6(anonymize_v6(addr.bytes()));
}

std::string PrefixAnonymizer::anonymize(const std::string& addr_text) const {
  return anonymize(IpAddr::parse(addr_text)).to_string();
}

}  // namespace trafficforge
