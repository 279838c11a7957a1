#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdd {

enum class ErrorKind {
  InvalidArgument,
  Configuration,
  HorizonExhausted,
  Unsupported,
  MissingDatum,
  AssumptionViolated,
  Divergence,
  IncompleteGrid,
  InvalidMeasurement,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Configuration: return "configuration-error";
    case ErrorKind::HorizonExhausted: return "horizon-exhausted";
    case ErrorKind::Unsupported: return "unsupported-configuration";
    case ErrorKind::MissingDatum: return "missing-datum";
    case ErrorKind::AssumptionViolated: return "assumption-violated";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::IncompleteGrid: return "incomplete-grid";
    case ErrorKind::InvalidMeasurement: return "invalid-measurement";
  }
  return "unknown";
}

// Process exit code used by the CLI for each error class. 1 is left to
// argument parsing failures.
constexpr int exit_code(ErrorKind kind) { return 2 + static_cast<int>(kind); }

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the error-class prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace pdd
