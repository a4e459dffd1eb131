#pragma once

#include <stdexcept>
#include <string>

namespace spdeito {

/// Argument outside its admissible set (position outside [0,1], negative time, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Pointwise kernel evaluation requested at t + eps = 0, where g is a delta.
class DegenerateTimeError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Evaluation time beyond the horizon of a shift field.
class HorizonError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A numerical resolution requirement (quadrature order, truncation, tail bound) is not met.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lookup of an observable, window or suite under a name that is not registered.
class UnknownNameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A path-based operation needs the driving increments, which exact_ou paths do not keep.
class MissingIncrementsError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Configuration file fails schema validation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spdeito
