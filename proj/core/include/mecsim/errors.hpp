#pragma once

#include <stdexcept>
#include <string>

namespace mecsim {

/// Bad or infeasible configuration (task set, chain, experiment spec).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Action outside the valid action space was handed to an operation that
/// requires a validated action.
struct InvalidActionError : std::runtime_error {
    explicit InvalidActionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Iterative numerical procedure failed to converge.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training diverged (non-finite loss or parameters).
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mecsim
