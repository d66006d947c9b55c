#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridci {

/// Every data error raised by the library carries one of these codes. The
/// CLI prints the code name so scripts can match on it.
enum class ErrorCode {
    UnknownSource,
    LengthMismatch,
    NegativeGeneration,
    NonFiniteValue,
    NegativeCef,
    InvalidSource,
    InvalidPortfolio,
    InvalidFraction,
    ZeroTotalGeneration,
    DegenerateResidualHour,
    WrongInputMethod,
    EmptyAfterExclusion,
    NoEligibleDc,
    MissingSignal,
    EmptyWindow,
    InfeasibleDeadline,
    InvalidWorkload,
    SignalSpanMismatch,
    MismatchedScenarios,
    ZeroBaselineEmissions,
    EmptyInput,
    ParseError,
    GapInSeries,
    DuplicateRow,
    IoError,
    InvalidArgument,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NegativeGeneration: return "NegativeGeneration";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NegativeCef: return "NegativeCef";
    case ErrorCode::InvalidSource: return "InvalidSource";
    case ErrorCode::InvalidPortfolio: return "InvalidPortfolio";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::ZeroTotalGeneration: return "ZeroTotalGeneration";
    case ErrorCode::DegenerateResidualHour: return "DegenerateResidualHour";
    case ErrorCode::WrongInputMethod: return "WrongInputMethod";
    case ErrorCode::EmptyAfterExclusion: return "EmptyAfterExclusion";
    case ErrorCode::NoEligibleDc: return "NoEligibleDc";
    case ErrorCode::MissingSignal: return "MissingSignal";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::InfeasibleDeadline: return "InfeasibleDeadline";
    case ErrorCode::InvalidWorkload: return "InvalidWorkload";
    case ErrorCode::SignalSpanMismatch: return "SignalSpanMismatch";
    case ErrorCode::MismatchedScenarios: return "MismatchedScenarios";
    case ErrorCode::ZeroBaselineEmissions: return "ZeroBaselineEmissions";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GapInSeries: return "GapInSeries";
    case ErrorCode::DuplicateRow: return "DuplicateRow";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

}  // namespace gridci
