#pragma once

#include <stdexcept>
#include <string>

namespace onebit {

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct BracketError : std::runtime_error {
    explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when the two empirical quantiles of the coarse estimator collapse
// (thresholds too close together or sample too small).
struct DegenerateQuantiles : std::runtime_error {
    explicit DegenerateQuantiles(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct BoundViolation : std::runtime_error {
    explicit BoundViolation(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace onebit
