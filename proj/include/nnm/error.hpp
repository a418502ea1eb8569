#pragma once

/**
 * @file error.hpp
 * @brief Error codes and the exception type shared by every nnm module.
 */

#include <stdexcept>
#include <string>
#include <string_view>

namespace nnm {

enum class ErrorCode {
    InvalidArgument,
    SingularMatrix,
    EstimatorSingular,
    NonConvergence,
    ContinuationStalled,
    BlowUp,
    InvalidMode,
    NonContraction,
    DegenerateAmplitude,
    EstimatorSolve,
    Resonance,
    Parse,
};

/// Stable machine-readable name, used in JSON error reports.
inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::SingularMatrix: return "singular-matrix";
    case ErrorCode::EstimatorSingular: return "estimator-singular";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::ContinuationStalled: return "continuation-stalled";
    case ErrorCode::BlowUp: return "blow-up";
    case ErrorCode::InvalidMode: return "invalid-mode";
    case ErrorCode::NonContraction: return "non-contraction";
    case ErrorCode::DegenerateAmplitude: return "degenerate-amplitude";
    case ErrorCode::EstimatorSolve: return "estimator-solve";
    case ErrorCode::Resonance: return "resonance";
    case ErrorCode::Parse: return "parse-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace nnm
