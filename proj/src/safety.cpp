#include "safety.hpp"

#include <nlohmann/json.hpp>

#include <unordered_set>

#include "errors.hpp"
#include "stream.hpp"

namespace trafficforge {

std::string SafetyReport::to_json() const {
  nlohmann::ordered_json j;
  j["records_checked"] = records_checked;
  j["violation_count"] = violation_count;
  j["violations"] = violations;
  return j.dump(2) + "\n";
}

namespace {

void flag(SafetyReport& report, const ConnRecord& rec, const std::string& why) {
  ++report.violation_count;
  if (report.violations.size() < SafetyReport::kMaxDetailed)
    report.violations.push_back(why + " (uid " + rec.uid + ", " +
                                rec.orig_h.to_string() + " -> " +
                                rec.resp_h.to_string() + ":" +
                                std::to_string(rec.resp_p) + ")");
}

}  // namespace

SafetyReport verify_safety(const std::string& conn_path,
                           const ScenarioConfig& config) {
  std::unordered_set<uint32_t> population;
  for (uint32_t addr : config.benign_population()) population.insert(addr);

  SafetyReport report;
  ConnReader reader(conn_path);
  ConnRecord rec;
  while (reader.next(rec)) {
    ++report.records_checked;

    if (!rec.resp_h.is_v4()) {
      flag(report, rec, "responder outside the simulated IPv4 space");
      continue;
    }
    uint32_t resp = rec.resp_h.v4_value();

    if (config.excluded.contains_u32(resp)) {
      flag(report, rec, "responder inside excluded_ranges");
      continue;
    }

    bool infra = config.is_infra(resp);
    bool benign_target = population.count(resp) > 0;
    if (!infra && !benign_target && !config.allowed.contains_u32(resp))
      flag(report, rec, "attack responder outside allowed_scan_ranges");

    if (resp == config.loader.ip.v4_value() && rec.resp_p == config.loader.port) {
      if (!rec.orig_h.is_v4() || !config.in_pool(rec.orig_h.v4_value()))
        flag(report, rec, "loader download from a non-pool node");
    }
  }
  return report;
}

}  // namespace trafficforge
