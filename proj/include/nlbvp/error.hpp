#ifndef NLBVP_ERROR_HPP
#define NLBVP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nlbvp {

enum class ErrorCode {
    InvalidArgument,
    ParseError,
    IoError,
    DimensionMismatch,
    NonCommensurateGrid,
    IsolatedVertex,
    NonPositiveConductance,
    AsymmetricDensity,
    AsymmetricKernel,
    NodeNotInOmega,
    NodeNotInGamma,
    EigensolverFailure,
    NonPositiveC,
    EmptyGamma,
    FriedrichsViolated,
    PoincareViolated,
    IncompatibleData,
    NoConvergence,
    SingularAfterRegularization,
    BadStep,
    HypothesisViolated,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

#define NLBVP_REQUIRE(cond, code, msg)                 \
    do {                                               \
        if (!(cond)) ::nlbvp::raise((code), (msg));    \
    } while (false)

} // namespace nlbvp

#endif
