#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csm {

enum class ErrorCode {
    DimensionMismatch,
    NonOrthonormalInput,
    IndexOutOfRange,
    InternalConsistency,
    StrengthOutOfRange,
    InvalidGram,
    NotPositiveSemidefinite,
    MeterNotOrthogonal,
    LengthMismatch,
    InitialMismatch,
    InvalidDistribution,
    FileNotFound,
    ParseError,
    ValidationError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library. The code identifies the failure
/// class; what() carries the human-readable detail.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonOrthonormalInput: return "NonOrthonormalInput";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InternalConsistency: return "InternalConsistency";
        case ErrorCode::StrengthOutOfRange: return "StrengthOutOfRange";
        case ErrorCode::InvalidGram: return "InvalidGram";
        case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
        case ErrorCode::MeterNotOrthogonal: return "MeterNotOrthogonal";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InitialMismatch: return "InitialMismatch";
        case ErrorCode::InvalidDistribution: return "InvalidDistribution";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

}  // namespace csm
