#pragma once

namespace trafficforge {

inline constexpr const char* kToolName = "trafficforge";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace trafficforge
