/**
 * @file error.hpp
 * @brief Error kinds and the exception type shared by every module.
 */
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bnsobol {

enum class ErrorKind {
  CyclicGraph,
  UnnormalizedCpt,
  ShapeMismatch,
  InvalidAssignment,
  OverlappingPartition,
  MissingValueMap,
  EmptyEvidenceSet,
  SyntaxError,
  UnsupportedFeature,
  SchemaError,
  IndexOutOfRange,
  AxisCardinalityMismatch,
  UnknownAxis,
  DivisionByZero,
  DegenerateOutput,
  NotEvidential,
  PartialFunction,
  StateSpaceTooLarge,
  DependentInputsUnsupported,
  InvalidArgument,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::CyclicGraph: return "CyclicGraph";
    case ErrorKind::UnnormalizedCpt: return "UnnormalizedCpt";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidAssignment: return "InvalidAssignment";
    case ErrorKind::OverlappingPartition: return "OverlappingPartition";
    case ErrorKind::MissingValueMap: return "MissingValueMap";
    case ErrorKind::EmptyEvidenceSet: return "EmptyEvidenceSet";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::AxisCardinalityMismatch: return "AxisCardinalityMismatch";
    case ErrorKind::UnknownAxis: return "UnknownAxis";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::DegenerateOutput: return "DegenerateOutput";
    case ErrorKind::NotEvidential: return "NotEvidential";
    case ErrorKind::PartialFunction: return "PartialFunction";
    case ErrorKind::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::DependentInputsUnsupported: return "DependentInputsUnsupported";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Outcome of a validation pass. `node` names the offending variable id when
/// the violation is attributable to one.
struct ValidationResult {
  bool ok = true;
  ErrorKind kind = ErrorKind::InvalidArgument;
  std::optional<int> node;
  std::string message;

  explicit operator bool() const noexcept { return ok; }

  static ValidationResult success() { return {}; }
  static ValidationResult failure(ErrorKind kind, std::string message,
                                  std::optional<int> node = std::nullopt) {
    return {false, kind, node, std::move(message)};
  }

  /// Throws the recorded error if validation failed.
  void throw_if_failed() const {
    if (!ok) throw Error(kind, message);
  }
};

}  // namespace bnsobol
