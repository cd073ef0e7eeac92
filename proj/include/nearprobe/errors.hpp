#pragma once

#include <stdexcept>
#include <string>

namespace nearprobe {

// Configuration / usage problems. The CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures (non-convergence, singular systems, ...). Exit code 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nearprobe
