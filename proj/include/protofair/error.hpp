#pragma once

#include <stdexcept>
#include <string>

namespace protofair {

// Caller broke a documented precondition (shape mismatch, non-unit rows, ...).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration value or malformed config file. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Component used before it was initialized (e.g. prototype bank before K-Means).
struct LifecycleError : std::runtime_error {
    explicit LifecycleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input data (malformed CSV row, empty metric cell, degenerate task).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace protofair
