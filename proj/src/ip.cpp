#include "ip.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cstring>

#include "errors.hpp"

namespace trafficforge {

IpAddr IpAddr::v4(uint32_t host_order) {
  IpAddr a;
  a.family_ = 4;
  a.bytes_[0] = static_cast<uint8_t>(host_order >> 24);
  a.bytes_[1] = static_cast<uint8_t>(host_order >> 16);
  a.bytes_[2] = static_cast<uint8_t>(host_order >> 8);
  a.bytes_[3] = static_cast<uint8_t>(host_order);
  return a;
}

IpAddr IpAddr::v6(const std::array<uint8_t, 16>& bytes) {
  IpAddr a;
  a.family_ = 6;
  a.bytes_ = bytes;
  return a;
}

bool IpAddr::try_parse(const std::string& text, IpAddr& out) {
  unsigned char buf[16];
  if (inet_pton(AF_INET, text.c_str(), buf) == 1) {
    out.family_ = 4;
    out.bytes_.fill(0);
    std::memcpy(out.bytes_.data(), buf, 4);
    return true;
  }
  if (inet_pton(AF_INET6, text.c_str(), buf) == 1) {
    out.family_ = 6;
    std::memcpy(out.bytes_.data(), buf, 16);
    return true;
  }
  return false;
}

IpAddr IpAddr::parse(const std::string& text) {
  IpAddr a;
  if (!try_parse(text, a)) throw invalid_address("not an IP address: " + text);
  return a;
}

uint32_t IpAddr::v4_value() const {
  return (static_cast<uint32_t>(bytes_[0]) << 24) |
         (static_cast<uint32_t>(bytes_[1]) << 16) |
         (static_cast<uint32_t>(bytes_[2]) << 8) | bytes_[3];
}

int IpAddr::bit(int i) const {
  return (bytes_[static_cast<size_t>(i / 8)] >> (7 - i % 8)) & 1;
}

void IpAddr::set_bit(int i, int value) {
  uint8_t mask = static_cast<uint8_t>(1u << (7 - i % 8));
  if (value)
    bytes_[static_cast<size_t>(i / 8)] |= mask;
  else
    bytes_[static_cast<size_t>(i / 8)] &= static_cast<uint8_t>(~mask);
}

std::string IpAddr::to_string() const {
  char buf[INET6_ADDRSTRLEN];
  if (family_ == 4) {
    inet_ntop(AF_INET, bytes_.data(), buf, sizeof(buf));
  } else if (family_ == 6) {
    inet_ntop(AF_INET6, bytes_.data(), buf, sizeof(buf));
  } else {
    return "<unset>";
  }
  return buf;
}

int lcp_bits(const IpAddr& a, const IpAddr& b) {
  if (a.family() != b.family())
    throw invalid_address("LCP of mixed address families");
  int width = a.width();
  const auto& ab = a.bytes();
  const auto& bb = b.bytes();
  for (int byte = 0; byte < width / 8; ++byte) {
    uint8_t x = static_cast<uint8_t>(ab[static_cast<size_t>(byte)] ^
                                     bb[static_cast<size_t>(byte)]);
    if (x != 0) {
      int lead = 0;
      while (!(x & 0x80)) {
        x = static_cast<uint8_t>(x << 1);
        ++lead;
      }
      return byte * 8 + lead;
    }
  }
  return width;
}

Cidr Cidr::parse(const std::string& text) {
  auto slash = text.find('/');
  Cidr c;
  if (slash == std::string::npos) {
    c.base = IpAddr::parse(text);
    c.prefix_len = c.base.width();
    return c;
  }
  c.base = IpAddr::parse(text.substr(0, slash));
  const std::string len_str = text.substr(slash + 1);
  char* end = nullptr;
  long len = std::strtol(len_str.c_str(), &end, 10);
  if (end == len_str.c_str() || *end != '\0' || len < 0 ||
      len > c.base.width())
    throw invalid_address("bad prefix length in " + text);
  c.prefix_len = static_cast<int>(len);
  // Zero host bits so contains() can compare prefixes directly.
  for (int i = c.prefix_len; i < c.base.width(); ++i) c.base.set_bit(i, 0);
  return c;
}

bool Cidr::contains(const IpAddr& addr) const {
  if (addr.family() != base.family()) return false;
  if (prefix_len == 0) return true;
  return lcp_bits(addr, base) >= prefix_len;
}

std::string Cidr::to_string() const {
  return base.to_string() + "/" + std::to_string(prefix_len);
}

void Ipv4RangeSet::add(const Cidr& cidr) {
  if (!cidr.base.is_v4())
    throw invalid_address("range set is IPv4-only, got " + cidr.to_string());
  uint32_t base = cidr.base.v4_value();
  uint32_t span = cidr.prefix_len == 0
                      ? 0xffffffffu
                      : ((cidr.prefix_len == 32)
                             ? 0u
                             : ((1u << (32 - cidr.prefix_len)) - 1u));
  intervals_.push_back({base, base + span});
  normalized_ = false;
}

void Ipv4RangeSet::add_address(const IpAddr& addr) {
  if (!addr.is_v4()) throw invalid_address("range set is IPv4-only");
  uint32_t v = addr.v4_value();
  intervals_.push_back({v, v});
  normalized_ = false;
}

void Ipv4RangeSet::normalize() {
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const auto& iv : intervals_) {
    bool touches =
        !merged.empty() &&
        (iv.lo <= merged.back().hi ||
         (merged.back().hi != 0xffffffffu && iv.lo == merged.back().hi + 1));
    if (touches)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  intervals_ = std::move(merged);
  cumulative_.clear();
  total_ = 0;
  for (const auto& iv : intervals_) {
    total_ += static_cast<uint64_t>(iv.hi) - iv.lo + 1;
    cumulative_.push_back(total_);
  }
  normalized_ = true;
}

bool Ipv4RangeSet::contains(const IpAddr& addr) const {
  if (!addr.is_v4()) return false;
  return contains_u32(addr.v4_value());
}

bool Ipv4RangeSet::contains_u32(uint32_t addr) const {
  auto it = std::upper_bound(
      intervals_.begin(), intervals_.end(), addr,
      [](uint32_t v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  --it;
  return addr >= it->lo && addr <= it->hi;
}

uint32_t Ipv4RangeSet::at(uint64_t index) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), index);
  size_t i = static_cast<size_t>(it - cumulative_.begin());
  uint64_t before = i == 0 ? 0 : cumulative_[i - 1];
  return static_cast<uint32_t>(intervals_[i].lo + (index - before));
}

std::vector<uint32_t> Ipv4RangeSet::to_addresses(uint64_t cap) const {
  if (total_ > cap)
    throw config_violation("range expansion of " + std::to_string(total_) +
                           " addresses exceeds cap " + std::to_string(cap));
  std::vector<uint32_t> out;
  out.reserve(static_cast<size_t>(total_));
  for (const auto& iv : intervals_)
    for (uint64_t v = iv.lo; v <= iv.hi; ++v)
      out.push_back(static_cast<uint32_t>(v));
  return out;
}

}  // namespace trafficforge
