// errors.hpp — exception taxonomy shared by the library and mapped to CLI exit codes
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ensctl {

// A config file or preset field failed validation.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// n*P_total > m*N: the discretized system would be overdetermined and the
// minimum-norm synthesis formula does not apply. The caller must refine N
// or coarsen the parameter grid.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive step-size control underflowed (stiffness or blow-up).
// Carries the time of failure and, when known, the offending parameter point.
struct IntegrationError : std::runtime_error {
    double time{0.0};
    std::vector<double> parameter;

    IntegrationError(const std::string& msg, double t)
        : std::runtime_error(msg), time(t) {}
    IntegrationError(const std::string& msg, double t, std::vector<double> beta)
        : std::runtime_error(msg), time(t), parameter(std::move(beta)) {}
};

// The SVD kernel failed to converge or was handed non-finite data.
struct DecompositionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An on-disk artifact (control file, binary dump) does not match the
// configuration it is being combined with.
struct FileMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CLI exit codes, one per failure class.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int shape = 3;
inline constexpr int integration = 4;
inline constexpr int decomposition = 5;
inline constexpr int file_mismatch = 6;
}  // namespace exit_code

}  // namespace ensctl
