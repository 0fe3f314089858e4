#pragma once

#include <stdexcept>
#include <string>

namespace sohkit {

/// Bad or inconsistent configuration (files, axes, proportions). CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or degenerate data (parse failures, NaNs, empty ranges). CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric/domain violations (non-finite state, covariance collapse). CLI exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Simulation diverged; carries the last time that still held finite state.
class SimulationError : public NumericError {
public:
    SimulationError(const std::string& what, double last_valid_time_s)
        : NumericError(what), last_valid_time_s(last_valid_time_s) {}

    double last_valid_time_s;
};

}  // namespace sohkit
