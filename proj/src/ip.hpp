#ifndef TRAFFICFORGE_IP_HPP
#define TRAFFICFORGE_IP_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace trafficforge {

// IPv4 or IPv6 address. Bytes are network order; v4 uses the first 4 bytes.
class IpAddr {
public:
  IpAddr() = default;

  static IpAddr v4(uint32_t host_order);
  static IpAddr v6(const std::array<uint8_t, 16>& bytes);

  // Parses dotted-quad or RFC 4291 text. Throws invalid_address.
  static IpAddr parse(const std::string& text);
  static bool try_parse(const std::string& text, IpAddr& out);

  bool is_v4() const { return family_ == 4; }
  bool is_v6() const { return family_ == 6; }
  int family() const { return family_; }
  int width() const { return family_ == 4 ? 32 : 128; }

  uint32_t v4_value() const;                       // host order
  const std::array<uint8_t, 16>& bytes() const { return bytes_; }

  // 0-indexed from the most significant bit.
  int bit(int i) const;
  void set_bit(int i, int value);

  std::string to_string() const;

  auto operator<=>(const IpAddr&) const = default;

private:
  int family_ = 0;
  std::array<uint8_t, 16> bytes_{};
};

// Longest common prefix of two same-family addresses, in bits.
int lcp_bits(const IpAddr& a, const IpAddr& b);

// CIDR block, either family.
struct Cidr {
  IpAddr base;
  int prefix_len = 0;

  // "10.0.0.0/16" or a bare address (full-width prefix).
  static Cidr parse(const std::string& text);
  bool contains(const IpAddr& addr) const;
  std::string to_string() const;
};

// Set of v4 ranges with uniform index-based addressing, used for scan-target
// sampling and membership checks. v6 members are rejected at build time.
class Ipv4RangeSet {
public:
  void add(const Cidr& cidr);
  void add_address(const IpAddr& addr);

  // Collapses overlaps into disjoint sorted intervals. Must be called after
  // the last add and before any query.
  void normalize();

  bool contains(const IpAddr& addr) const;
  bool contains_u32(uint32_t addr) const;
  uint64_t size() const { return total_; }
  bool empty() const { return total_ == 0; }

  // index in [0, size()) -> the index-th address in sorted order.
  uint32_t at(uint64_t index) const;

  std::vector<uint32_t> to_addresses(uint64_t cap) const;

private:
  struct Interval {
    uint32_t lo;
    uint32_t hi;  // inclusive
  };
  std::vector<Interval> intervals_;
  std::vector<uint64_t> cumulative_;  // running count up to interval i
  uint64_t total_ = 0;
  bool normalized_ = true;
};

}  // namespace trafficforge

#endif
