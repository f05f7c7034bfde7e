#pragma once

#include <stdexcept>
#include <string>

namespace dbounds {

// Configuration or precondition problems (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Failures of the numerics themselves (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteState : public NumericalError {
public:
    NonFiniteState(const std::string& what, double time, int iterate = -1)
        : NumericalError(what), time_(time), iterate_(iterate) {}

    double time() const noexcept { return time_; }
    // Cascade index k (1-based) that blew up, or -1 outside a cascade.
    int iterate() const noexcept { return iterate_; }

private:
    double time_;
    int iterate_;
};

class StepExceedsMinDelay : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class OutOfDomain : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class DefectiveMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class UnsupportedNonlinearity : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class MissingIterate : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class MeshMismatch : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotHurwitz : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace dbounds
