#include "manifest.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "errors.hpp"
#include "stream.hpp"

namespace trafficforge {

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = tool;
  j["version"] = version;
  j["command"] = command;
  j["rng_seed"] = rng_seed;
  j["start_ts"] = start_ts;
  j["format"] = format;
  j["hash_hex_len"] = hash_hex_len;
  j["key_fingerprint"] = key_fingerprint;
  auto entries = [](const std::map<std::string, ManifestEntry>& m) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [name, entry] : m) {
      nlohmann::ordered_json e;
      e["path"] = entry.path;
      e["sha256"] = entry.sha256;
      out[name] = std::move(e);
    }
    return out;
  };
  j["inputs"] = entries(inputs);
  j["outputs"] = entries(outputs);
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_violation(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw config_violation("manifest must be a JSON object");

  Manifest m;
  auto str = [&](const char* key) -> std::string {
    if (!doc.contains(key) || !doc[key].is_string())
      throw config_violation(std::string("manifest missing string field \"") +
                             key + "\"");
    return doc[key].get<std::string>();
  };
  m.tool = str("tool");
  m.version = str("version");
  m.command = str("command");
  m.format = str("format");
  m.key_fingerprint = str("key_fingerprint");
  if (!doc.contains("rng_seed") || !doc["rng_seed"].is_number())
    throw config_violation("manifest missing rng_seed");
  m.rng_seed = doc["rng_seed"].get<uint64_t>();
  if (doc.contains("start_ts")) m.start_ts = doc["start_ts"].get<double>();
  if (doc.contains("hash_hex_len"))
    m.hash_hex_len = doc["hash_hex_len"].get<uint64_t>();

  auto entries = [&](const char* key, std::map<std::string, ManifestEntry>& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_object())
      throw config_violation(std::string("manifest ") + key +
                             " must be an object");
    for (auto it = doc[key].begin(); it != doc[key].end(); ++it) {
      const auto& e = it.value();
      if (!e.is_object() || !e.contains("path") || !e.contains("sha256"))
        throw config_violation(std::string("manifest ") + key + "." + it.key() +
                               " needs path and sha256");
      out[it.key()] = ManifestEntry{e["path"].get<std::string>(),
                                    e["sha256"].get<std::string>()};
    }
  };
  entries("inputs", m.inputs);
  entries("outputs", m.outputs);
  return m;
}

Manifest Manifest::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_failure("cannot open manifest " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

void Manifest::save(const std::string& path) const {
  LineWriter out(path, Compression::None);
  std::string json = to_json();
  if (!json.empty() && json.back() == '\n') json.pop_back();
  out.write_line(json);
  out.close();
}

}  // namespace trafficforge
