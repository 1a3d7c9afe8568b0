#include "nlbvp/error.hpp"

namespace nlbvp {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonCommensurateGrid: return "NonCommensurateGrid";
    case ErrorCode::IsolatedVertex: return "IsolatedVertex";
    case ErrorCode::NonPositiveConductance: return "NonPositiveConductance";
    case ErrorCode::AsymmetricDensity: return "AsymmetricDensity";
    case ErrorCode::AsymmetricKernel: return "AsymmetricKernel";
    case ErrorCode::NodeNotInOmega: return "NodeNotInOmega";
    case ErrorCode::NodeNotInGamma: return "NodeNotInGamma";
    case ErrorCode::EigensolverFailure: return "EigensolverFailure";
    case ErrorCode::NonPositiveC: return "NonPositiveC";
    case ErrorCode::EmptyGamma: return "EmptyGamma";
    case ErrorCode::FriedrichsViolated: return "FriedrichsViolated";
    case ErrorCode::PoincareViolated: return "PoincareViolated";
    case ErrorCode::IncompatibleData: return "IncompatibleData";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularAfterRegularization: return "SingularAfterRegularization";
    case ErrorCode::BadStep: return "BadStep";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    }
    return "Unknown";
}

void raise(ErrorCode code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace nlbvp
