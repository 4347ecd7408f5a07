#ifndef TRAFFICFORGE_CRYPTO_HPP
#define TRAFFICFORGE_CRYPTO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace trafficforge {

using Digest256 = std::array<uint8_t, 32>;

Digest256 sha256(const void* data, size_t len);
Digest256 sha256(const std::string& data);
Digest256 hmac_sha256(const Digest256& key, const std::string& message);

std::string to_hex(const uint8_t* data, size_t len);
std::string to_hex(const Digest256& d);
// Throws on odd length or non-hex characters.
std::vector<uint8_t> from_hex(const std::string& hex);

std::string sha256_file_hex(const std::string& path);

// AES-128-ECB used as a keyed pseudorandom function over 16-byte blocks.
// Encrypts `blocks` consecutive blocks of `in` into `out` in one pass.
// Instances are cheap to construct and not thread-safe.
class AesPrf {
public:
  explicit AesPrf(const uint8_t key[16]);
  AesPrf(const AesPrf&) = delete;
  AesPrf& operator=(const AesPrf&) = delete;
  AesPrf(AesPrf&& other) noexcept;
  ~AesPrf();

  void encrypt_blocks(const uint8_t* in, uint8_t* out, int blocks);

private:
  void* ctx_ = nullptr;
};

}  // namespace trafficforge

#endif
