#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyplab {

enum class ErrorKind {
  UnknownLetter,
  ParseError,
  NonReducingRule,
  NotLocallyConfluent,
  AsymmetricAlphabet,
  InvalidOrder,
  BallTooLarge,
  CapExceeded,
  InsufficientData,
  MissingSizes,
  InvalidCoefficient,
  DimensionMismatch,
  NotFreeBackend,
  ElementaryGroup,
  UnsupportedBackend,
  NotANormalFormRay,
  DepthTooSmall,
  BadSpec,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownLetter: return "UnknownLetter";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonReducingRule: return "NonReducingRule";
    case ErrorKind::NotLocallyConfluent: return "NotLocallyConfluent";
    case ErrorKind::AsymmetricAlphabet: return "AsymmetricAlphabet";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::BallTooLarge: return "BallTooLarge";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::MissingSizes: return "MissingSizes";
    case ErrorKind::InvalidCoefficient: return "InvalidCoefficient";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotFreeBackend: return "NotFreeBackend";
    case ErrorKind::ElementaryGroup: return "ElementaryGroup";
    case ErrorKind::UnsupportedBackend: return "UnsupportedBackend";
    case ErrorKind::NotANormalFormRay: return "NotANormalFormRay";
    case ErrorKind::DepthTooSmall: return "DepthTooSmall";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures caused by user input rather than by computation
  /// limits; the CLI maps these to exit code 2.
  bool is_argument_error() const noexcept {
    switch (kind_) {
      case ErrorKind::UnknownLetter:
      case ErrorKind::ParseError:
      case ErrorKind::NonReducingRule:
      case ErrorKind::NotLocallyConfluent:
      case ErrorKind::AsymmetricAlphabet:
      case ErrorKind::InvalidOrder:
      case ErrorKind::InvalidCoefficient:
      case ErrorKind::BadSpec:
      case ErrorKind::NotFreeBackend:
      case ErrorKind::IoError:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace hyplab
