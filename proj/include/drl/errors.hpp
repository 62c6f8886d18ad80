#pragma once

#include <stdexcept>
#include <string>

namespace drl {

// Bad user input: malformed config/CSV, out-of-range parameters.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// No valid device assignment exists for the requested workload.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Failure while executing a training run (protocol violation, watchdog, ...).
class RuntimeFailure : public std::runtime_error {
public:
    explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace drl
