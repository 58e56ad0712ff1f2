#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jetid {

enum class ErrorCode {
    DiscriminantNegative,
    NoEquilibriumInBracket,
    EmptySpec,
    NonFiniteState,
    MissingDerivatives,
    WindowTooLarge,
    OrderTooHigh,
    ShapeMismatch,
    SingularInnovation,
    AllTermsEliminated,
    RankDeficientRegressor,
    NoConvergence,
    DivergenceDetected,
    GNearZero,
    GainNotPositive,
    InfeasibleEndurance,
    InvalidArgument,
    ParseError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DiscriminantNegative: return "DiscriminantNegative";
    case ErrorCode::NoEquilibriumInBracket: return "NoEquilibriumInBracket";
    case ErrorCode::EmptySpec: return "EmptySpec";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::MissingDerivatives: return "MissingDerivatives";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingularInnovation: return "SingularInnovation";
    case ErrorCode::AllTermsEliminated: return "AllTermsEliminated";
    case ErrorCode::RankDeficientRegressor: return "RankDeficientRegressor";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::GNearZero: return "GNearZero";
    case ErrorCode::GainNotPositive: return "GainNotPositive";
    case ErrorCode::InfeasibleEndurance: return "InfeasibleEndurance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace jetid
