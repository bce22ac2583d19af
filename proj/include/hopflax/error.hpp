#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hopflax {

enum class ErrorKind {
  AsymmetricDistance,
  TriangleViolation,
  NegativeDistance,
  DisconnectedGraph,
  DualDiverges,
  NotDelta2,
  NonPositiveField,
  InfeasibleMarginals,
  NotCConvex,
  FieldOutsideClass,
  LambdaOutOfRange,
  ParameterOutOfRange,
  UOutOfRange,
  XOutOfRange,
  TOutOfRange,
  ThetaBelowFloor,
  DegenerateSchedule,
  NonPositiveExponent,
  ParseError,
  ValidationError,
  Internal,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AsymmetricDistance: return "AsymmetricDistance";
    case ErrorKind::TriangleViolation: return "TriangleViolation";
    case ErrorKind::NegativeDistance: return "NegativeDistance";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::DualDiverges: return "DualDiverges";
    case ErrorKind::NotDelta2: return "NotDelta2";
    case ErrorKind::NonPositiveField: return "NonPositiveField";
    case ErrorKind::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorKind::NotCConvex: return "NotCConvex";
    case ErrorKind::FieldOutsideClass: return "FieldOutsideClass";
    case ErrorKind::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::UOutOfRange: return "UOutOfRange";
    case ErrorKind::XOutOfRange: return "XOutOfRange";
    case ErrorKind::TOutOfRange: return "TOutOfRange";
    case ErrorKind::ThetaBelowFloor: return "ThetaBelowFloor";
    case ErrorKind::DegenerateSchedule: return "DegenerateSchedule";
    case ErrorKind::NonPositiveExponent: return "NonPositiveExponent";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

/// Every failure raised by the library. `indices()` names the offending
/// points (pair, triple, or single index) when the error is about data.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::vector<std::size_t> indices = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        indices_(std::move(indices)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  ErrorKind kind_;
  std::vector<std::size_t> indices_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              std::vector<std::size_t> indices = {}) {
  throw Error(kind, message, std::move(indices));
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::ValidationError, message);
}

}  // namespace hopflax
