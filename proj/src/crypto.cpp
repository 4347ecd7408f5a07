#include "crypto.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>

#include "errors.hpp"

namespace trafficforge {

namespace {

EVP_MD_CTX* tls_md_ctx() {
  thread_local EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  return ctx;
}

}  // namespace

Digest256 sha256(const void* data, size_t len) {
  Digest256 out{};
  EVP_MD_CTX* ctx = tls_md_ctx();
  unsigned int outl = 0;
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data, len);
  EVP_DigestFinal_ex(ctx, out.data(), &outl);
  return out;
}

Digest256 sha256(const std::string& data) {
  return sha256(data.data(), data.size());
}

Digest256 hmac_sha256(const Digest256& key, const std::string& message) {
  // HMAC with a 32-byte key over a 64-byte block cipher boundary.
  uint8_t ipad[64], opad[64];
  std::memset(ipad, 0x36, sizeof(ipad));
  std::memset(opad, 0x5c, sizeof(opad));
  for (size_t i = 0; i < key.size(); ++i) {
    ipad[i] ^= key[i];
    opad[i] ^= key[i];
  }
  EVP_MD_CTX* ctx = tls_md_ctx();
  Digest256 inner{};
  unsigned int outl = 0;
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, ipad, sizeof(ipad));
  EVP_DigestUpdate(ctx, message.data(), message.size());
  EVP_DigestFinal_ex(ctx, inner.data(), &outl);

  Digest256 out{};
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, opad, sizeof(opad));
  EVP_DigestUpdate(ctx, inner.data(), inner.size());
  EVP_DigestFinal_ex(ctx, out.data(), &outl);
  return out;
}

std::string to_hex(const uint8_t* data, size_t len) {
  static const char digits[] = "0123456789abcdef";
  std::string s;
  s.resize(len * 2);
  for (size_t i = 0; i < len; ++i) {
    s[2 * i] = digits[data[i] >> 4];
    s[2 * i + 1] = digits[data[i] & 0xf];
  }
  return s;
}

std::string to_hex(const Digest256& d) { return to_hex(d.data(), d.size()); }

std::vector<uint8_t> from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0)
    throw config_violation("hex string has odd length");
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0)
      throw config_violation("invalid hex character in key material");
    out[i] = static_cast<uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string sha256_file_hex(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw io_failure("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<uint8_t> buf(1 << 16);
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0)
    EVP_DigestUpdate(ctx, buf.data(), n);
  bool read_error = std::ferror(f) != 0;
  std::fclose(f);
  Digest256 out{};
  unsigned int outl = 0;
  EVP_DigestFinal_ex(ctx, out.data(), &outl);
  EVP_MD_CTX_free(ctx);
  if (read_error) throw io_failure("read error on " + path);
  return to_hex(out);
}

AesPrf::AesPrf(const uint8_t key[16]) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx || !EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key,
                                  nullptr)) {
    EVP_CIPHER_CTX_free(ctx);
    throw io_failure("AES context initialization failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  ctx_ = ctx;
}

AesPrf::AesPrf(AesPrf&& other) noexcept : ctx_(other.ctx_) {
  other.ctx_ = nullptr;
}

AesPrf::~AesPrf() {
  if (ctx_) EVP_CIPHER_CTX_free(static_cast<EVP_CIPHER_CTX*>(ctx_));
}

void AesPrf::encrypt_blocks(const uint8_t* in, uint8_t* out, int blocks) {
  int outl = 0;
  EVP_EncryptUpdate(static_cast<EVP_CIPHER_CTX*>(ctx_), out, &outl, in,
                    blocks * 16);
}

}  // namespace trafficforge
