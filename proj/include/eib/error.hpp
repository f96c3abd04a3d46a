// error.hpp
//
// Error type shared by every eib module. All precondition and contract
// failures surface as eib::Error carrying an ErrorKind so that callers (the
// CLI in particular) can map them onto exit codes.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eib {

enum class ErrorKind {
    NotNormalized,
    NegativeEntry,
    DimensionMismatch,
    DomainError,
    AllClustersDead,
    UnknownInstance,
    DegenerateDistribution,
    EnumerationBudgetExceeded,
    CovarianceMismatch,
    LengthMismatch,
    AssignmentBudgetExceeded,
    EmptyGroup,
    EmptyBatch,
    InvalidConfig,
    MalformedInput,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::NegativeEntry: return "NegativeEntry";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::AllClustersDead: return "AllClustersDead";
        case ErrorKind::UnknownInstance: return "UnknownInstance";
        case ErrorKind::DegenerateDistribution: return "DegenerateDistribution";
        case ErrorKind::EnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
        case ErrorKind::CovarianceMismatch: return "CovarianceMismatch";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::AssignmentBudgetExceeded: return "AssignmentBudgetExceeded";
        case ErrorKind::EmptyGroup: return "EmptyGroup";
        case ErrorKind::EmptyBatch: return "EmptyBatch";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::MalformedInput: return "MalformedInput";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace eib
