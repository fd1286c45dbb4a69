#pragma once

#include <stdexcept>
#include <string>

namespace aircal {

/// Bad configuration or failed pre-run validation. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed, inconsistent or insufficient input data. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during estimation. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The local normal matrix is not positive definite within tolerance.
/// Carries the condition estimate so callers can report it.
class SingularFitError : public NumericalError {
public:
    SingularFitError(const std::string& msg, double condition)
        : NumericalError(msg), condition_(condition) {}
    double condition() const { return condition_; }

private:
    double condition_;
};

} // namespace aircal
