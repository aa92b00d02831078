#pragma once

#include <stdexcept>
#include <string>

namespace koopgen {

// Trajectory left the admissible region during integration.
struct BlowUpError : std::runtime_error {
    explicit BlowUpError(const std::string& msg) : std::runtime_error(msg) {}
};

// Adaptive step size fell below representable progress.
struct StepUnderflowError : std::runtime_error {
    explicit StepUnderflowError(const std::string& msg) : std::runtime_error(msg) {}
};

// A weight vector was used against a dictionary it was not fitted on.
struct BasisMismatchError : std::runtime_error {
    explicit BasisMismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

// Koopman matrix is not diagonalizable within tolerance.
struct NonDiagonalizableError : std::runtime_error {
    explicit NonDiagonalizableError(const std::string& msg) : std::runtime_error(msg) {}
};

// An eigenvalue sits on (or too close to) the principal-branch cut.
struct BranchCutError : std::runtime_error {
    explicit BranchCutError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested coordinate function is not a dictionary member.
struct CoordinateNotInDictionaryError : std::runtime_error {
    explicit CoordinateNotInDictionaryError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GenerationError : std::runtime_error {
    explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace koopgen
