#pragma once
#include <stdexcept>
#include <string>

namespace bell {

// Error taxonomy shared by the core and mirrored by the C API status codes.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Scenario exceeds the configured enumeration cap.
struct TooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

// A postcondition that should hold by construction failed; signals a bug.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace bell
