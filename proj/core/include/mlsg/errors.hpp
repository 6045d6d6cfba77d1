#pragma once

#include <stdexcept>
#include <string>

namespace mlsg {

/// Argument outside the documented domain of an operation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear solver breakdown, loss of definiteness or residual above tolerance.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A modelling precondition does not hold for the supplied data
/// (for example a tolerance coarser than the coarse-level variability).
class PreconditionViolated : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The refinement loop hit its level or DOF budget before the spatial
/// error estimate dropped below tolerance.
class ToleranceUnreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mlsg
