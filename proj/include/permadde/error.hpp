#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace permadde {

enum class ErrorCode {
  ArityMismatch,
  UnknownPreset,
  BadParams,
  ParseError,
  NonFiniteValue,
  PositivityLoss,
  InadmissibleHistory,
  InvalidModel,
  OutOfRange,
  FamilyMismatch,
  EnvelopeUnavailable,
  NoSignChange,
  UnsupportedFamily,
  HorizonTooShort,
  GridMismatch,
  NotCertified,
  BadParamPath,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::PositivityLoss: return "PositivityLoss";
    case ErrorCode::InadmissibleHistory: return "InadmissibleHistory";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::FamilyMismatch: return "FamilyMismatch";
    case ErrorCode::EnvelopeUnavailable: return "EnvelopeUnavailable";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NotCertified: return "NotCertified";
    case ErrorCode::BadParamPath: return "BadParamPath";
  }
  return "Unknown";
}

}  // namespace permadde
