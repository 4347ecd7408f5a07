#include "keys.hpp"

#include <openssl/rand.h>
#include <sys/stat.h>

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "errors.hpp"

namespace trafficforge {

MasterKey MasterKey::generate() {
  MasterKey key;
  if (RAND_bytes(key.bytes.data(), static_cast<int>(key.bytes.size())) != 1)
    throw io_failure("system entropy source unavailable");
  return key;
}

MasterKey MasterKey::from_hex(const std::string& hex) {
  std::string trimmed;
  trimmed.reserve(hex.size());
  for (char c : hex)
    if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
  if (trimmed.size() != 64)
    throw config_violation("master key must be 64 hex characters, got " +
                           std::to_string(trimmed.size()));
  auto raw = trafficforge::from_hex(trimmed);
  MasterKey key;
  std::copy(raw.begin(), raw.end(), key.bytes.begin());
  return key;
}

MasterKey MasterKey::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot open key file " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  try {
    return from_hex(content);
  } catch (const Error& e) {
    throw config_violation("key file " + path + ": " + e.what());
  }
}

MasterKey MasterKey::resolve(const std::string& key_arg) {
  auto looks_like_hex = [](const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s)
      if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  if (!key_arg.empty()) {
    if (looks_like_hex(key_arg)) return from_hex(key_arg);
    return load(key_arg);
  }
  if (const char* env = std::getenv("TRAFFICFORGE_KEY"); env && *env) {
    std::string value = env;
    if (looks_like_hex(value)) return from_hex(value);
    return load(value);
  }
  throw config_violation(
      "no master key: pass --key <hex-or-file> or set TRAFFICFORGE_KEY");
}

void MasterKey::save(const std::string& path) const {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_failure("cannot create key file " + path);
    out << to_hex() << '\n';
    if (!out) throw io_failure("write failed on key file " + path);
  }
  if (chmod(path.c_str(), S_IRUSR | S_IWUSR) != 0)
    throw io_failure("cannot restrict permissions on key file " + path);
}

std::string MasterKey::fingerprint() const {
  Digest256 digest = sha256(bytes.data(), bytes.size());
  return trafficforge::to_hex(digest.data(), 8);
}

namespace {
constexpr const char* kIpv4Label = "tf/ip/v4";
constexpr const char* kIpv6Label = "tf/ip/v6";
constexpr const char* kFieldLabelPrefix = "tf/field/";
}  // namespace

const Digest256& KeySet::ipv4_key() const {
  if (!ip_ready_[0]) {
    ip_keys_[0] = hmac_sha256(master_.bytes, kIpv4Label);
    ip_ready_[0] = true;
  }
  return ip_keys_[0];
}

const Digest256& KeySet::ipv6_key() const {
  if (!ip_ready_[1]) {
    ip_keys_[1] = hmac_sha256(master_.bytes, kIpv6Label);
    ip_ready_[1] = true;
  }
  return ip_keys_[1];
}

const Digest256& KeySet::field_key(const std::string& value_class) const {
  auto it = field_keys_.find(value_class);
  if (it == field_keys_.end())
    it = field_keys_
             .emplace(value_class,
                      hmac_sha256(master_.bytes, kFieldLabelPrefix + value_class))
             .first;
  return it->second;
}

std::string KeySet::hash_field(const std::string& value_class,
                               const std::string& value, size_t hex_len) const {
  const Digest256& key = field_key(value_class);
  std::string message(reinterpret_cast<const char*>(key.data()), key.size());
  message += value;
  Digest256 digest = sha256(message);
  if (hex_len > digest.size() * 2) hex_len = digest.size() * 2;
  std::string hex = trafficforge::to_hex(digest.data(), digest.size());
  hex.resize(hex_len);
  return hex;
}

}  // namespace trafficforge
