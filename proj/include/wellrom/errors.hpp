#pragma once

#include <stdexcept>
#include <string>

namespace wellrom {

/// Invalid physical argument (e.g. a saturation outside [0, 1]).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent or unusable problem setup. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed data handed to an operation (dimension mismatch, empty input).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fine-scale simulation could not advance. Maps to CLI exit code 3.
class SimulationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Overlap between configuration sets that must be disjoint. Maps to exit code 4.
class LeakageError : public InputError {
public:
    using InputError::InputError;
};

/// Regressor training diverged.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, int epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

} // namespace wellrom
