#pragma once

#include <stdexcept>
#include <string>

namespace gfk {

enum class ErrorCode {
    InvalidParams,
    DriftSingular,
    WeightOverflow,
    AllWeightsDegenerate,
    EvaluationAtNucleus,
    CoalescencePoint,
    NodalRegion,
    SpecShapeMismatch,
    NonpositiveZ,
    TruncationInsufficient,
    DegenerateDesign,
    ZeroDenominatorBlock,
    ConfigInvalid,
    TrialFileMissing,
    OutputUnwritable,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidParams:          return "InvalidParams";
        case ErrorCode::DriftSingular:          return "DriftSingular";
        case ErrorCode::WeightOverflow:         return "WeightOverflow";
        case ErrorCode::AllWeightsDegenerate:   return "AllWeightsDegenerate";
        case ErrorCode::EvaluationAtNucleus:    return "EvaluationAtNucleus";
        case ErrorCode::CoalescencePoint:       return "CoalescencePoint";
        case ErrorCode::NodalRegion:            return "NodalRegion";
        case ErrorCode::SpecShapeMismatch:      return "SpecShapeMismatch";
        case ErrorCode::NonpositiveZ:           return "NonpositiveZ";
        case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
        case ErrorCode::DegenerateDesign:       return "DegenerateDesign";
        case ErrorCode::ZeroDenominatorBlock:   return "ZeroDenominatorBlock";
        case ErrorCode::ConfigInvalid:          return "ConfigInvalid";
        case ErrorCode::TrialFileMissing:       return "TrialFileMissing";
        case ErrorCode::OutputUnwritable:       return "OutputUnwritable";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace gfk
