#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qnet {

enum class ErrorCode {
  InvalidNetwork,
  NonpositiveLength,
  UnknownEdge,
  UnknownVertex,
  UnknownChannel,
  ProbeOutOfRange,
  ProbeTooWide,
  InvalidArgument,
  InvalidEnergy,
  NearThreshold,
  SingularSystem,
  PositionOutOfRange,
  MagnitudeTooSmall,
  Nonconverged,
  ZeroOnLoop,
  SubdivisionCapExceeded,
  ParseError,
  UnknownKey,
  MissingRequired,
  IoError,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidNetwork: return "INVALID_NETWORK";
    case ErrorCode::NonpositiveLength: return "NONPOSITIVE_LENGTH";
    case ErrorCode::UnknownEdge: return "UNKNOWN_EDGE";
    case ErrorCode::UnknownVertex: return "UNKNOWN_VERTEX";
    case ErrorCode::UnknownChannel: return "UNKNOWN_CHANNEL";
    case ErrorCode::ProbeOutOfRange: return "PROBE_OUT_OF_RANGE";
    case ErrorCode::ProbeTooWide: return "PROBE_TOO_WIDE";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::InvalidEnergy: return "INVALID_ENERGY";
    case ErrorCode::NearThreshold: return "NEAR_THRESHOLD";
    case ErrorCode::SingularSystem: return "SINGULAR_SYSTEM";
    case ErrorCode::PositionOutOfRange: return "POSITION_OUT_OF_RANGE";
    case ErrorCode::MagnitudeTooSmall: return "MAGNITUDE_TOO_SMALL";
    case ErrorCode::Nonconverged: return "NONCONVERGED";
    case ErrorCode::ZeroOnLoop: return "ZERO_ON_LOOP";
    case ErrorCode::SubdivisionCapExceeded: return "SUBDIVISION_CAP_EXCEEDED";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::UnknownKey: return "UNKNOWN_KEY";
    case ErrorCode::MissingRequired: return "MISSING_REQUIRED";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

/// Process exit status used by the CLI for each error code (0 is success).
constexpr int exit_status(ErrorCode code) { return 10 + static_cast<int>(code); }

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qnet
