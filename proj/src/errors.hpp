#ifndef TRAFFICFORGE_ERRORS_HPP
#define TRAFFICFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace trafficforge {

// Coarse buckets drive CLI exit codes and C API status values; the
// fine-grained name travels in the message prefix.
enum class ErrorCategory {
  Usage = 2,
  Config = 3,
  Safety = 4,
  Io = 5,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, std::string name, const std::string& msg)
      : std::runtime_error(name + ": " + msg),
        category_(cat),
        name_(std::move(name)) {}

  ErrorCategory category() const { return category_; }
  const std::string& name() const { return name_; }

private:
  ErrorCategory category_;
  std::string name_;
};

inline Error usage_error(const std::string& msg) {
  return Error(ErrorCategory::Usage, "usage", msg);
}
inline Error config_violation(const std::string& msg) {
  return Error(ErrorCategory::Config, "config-violation", msg);
}
inline Error policy_gap(const std::string& msg) {
  return Error(ErrorCategory::Config, "policy-gap", msg);
}
inline Error invalid_address(const std::string& msg) {
  return Error(ErrorCategory::Config, "invalid-address", msg);
}
inline Error unknown_class(const std::string& msg) {
  return Error(ErrorCategory::Config, "unknown-class", msg);
}
inline Error roster_invalid(const std::string& msg) {
  return Error(ErrorCategory::Config, "roster-invalid", msg);
}
inline Error safety_violation(const std::string& msg) {
  return Error(ErrorCategory::Safety, "safety-violation", msg);
}
inline Error io_failure(const std::string& msg) {
  return Error(ErrorCategory::Io, "io-failure", msg);
}
inline Error malformed_line(const std::string& msg) {
  return Error(ErrorCategory::Io, "malformed-line", msg);
}
inline Error unknown_format(const std::string& msg) {
  return Error(ErrorCategory::Io, "unknown-format", msg);
}
inline Error unsorted_input(const std::string& msg) {
  return Error(ErrorCategory::Io, "unsorted-input", msg);
}
inline Error truth_mismatch(const std::string& msg) {
  return Error(ErrorCategory::Io, "truth-mismatch", msg);
}
inline Error sink_failure(const std::string& msg) {
  return Error(ErrorCategory::Io, "sink-failure", msg);
}

}  // namespace trafficforge

#endif
