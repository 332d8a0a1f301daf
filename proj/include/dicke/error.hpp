#pragma once

#include <stdexcept>
#include <string>

namespace dicke {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument outside the domain of a function (negative rate, R > 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Unparseable or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or insufficient experimental data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or an ill-posed numerical quantity.
class NumericError : public Error {
public:
    using Error::Error;
};

/// The ODE integrator could not advance; carries the last accepted time (ps).
class IntegrationError : public NumericError {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : NumericError(what + " (last good t = " + std::to_string(last_good_time) + " ps)"),
          last_good_time_(last_good_time) {}

    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// Fock-space truncation of the exact solver was not adequate.
class TruncationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Process exit codes used by the command-line front end.
enum class ExitCode : int { ok = 0, failure = 1, config = 2, numeric = 3, data = 4 };

inline ExitCode exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return ExitCode::config;
    if (dynamic_cast<const NumericError*>(&e)) return ExitCode::numeric;
    if (dynamic_cast<const DataError*>(&e)) return ExitCode::data;
    return ExitCode::failure;
}

}  // namespace dicke
