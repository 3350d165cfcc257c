#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agreement {

enum class ErrorCode {
  DimensionMismatch,
  NegativeProbability,
  MassNotOne,
  MeanOutOfRange,
  ZeroMassSlice,
  DomainError,
  EpsilonOutOfRange,
  NotARefinement,
  TooLargeForEnumeration,
  SynthesisFailed,
  NotBoolean,
  InvalidInput,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::MassNotOne: return "MassNotOne";
    case ErrorCode::MeanOutOfRange: return "MeanOutOfRange";
    case ErrorCode::ZeroMassSlice: return "ZeroMassSlice";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::NotARefinement: return "NotARefinement";
    case ErrorCode::TooLargeForEnumeration: return "TooLargeForEnumeration";
    case ErrorCode::SynthesisFailed: return "SynthesisFailed";
    case ErrorCode::NotBoolean: return "NotBoolean";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace agreement
