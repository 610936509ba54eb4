#pragma once

#include <stdexcept>
#include <string>

namespace pqagent {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or inputs outside a function's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Mixing weight and alignment make the prioritization variance vanish.
class DegenerateRule : public DomainError {
public:
    using DomainError::DomainError;
};

class RateOutOfRange : public DomainError {
public:
    using DomainError::DomainError;
};

class TruncationError : public DomainError {
public:
    using DomainError::DomainError;
};

class UnsupportedScenario : public DomainError {
public:
    using DomainError::DomainError;
};

class InfeasibleConstraint : public DomainError {
public:
    using DomainError::DomainError;
};

/// Configuration rejected by the experiment runner.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Offered load at or above the service rate of some queue.
class StabilityError : public Error {
public:
    using Error::Error;
};

class StabilityViolation : public StabilityError {
public:
    using StabilityError::StabilityError;
};

class UnstableConfig : public StabilityError {
public:
    using StabilityError::StabilityError;
};

/// A simulated queue grew past its configured cap.
class OverflowGuard : public StabilityError {
public:
    using StabilityError::StabilityError;
};

class NoStableRouting : public StabilityError {
public:
    using StabilityError::StabilityError;
};

}  // namespace pqagent
