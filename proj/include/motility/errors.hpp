#pragma once

#include <stdexcept>
#include <string>

namespace motility {

/// Argument outside the domain where a coefficient is defined.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct SingularEndpointError : DomainError {
    using DomainError::DomainError;
};

struct NoUnstableModeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration or parameter set; maps to CLI exit code 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A time integration gave up (step-size underflow, geometry failure).
/// Maps to CLI exit code 1.
struct SolverAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedGeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace motility
