#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace legp {

/// Bad input data or configuration. The CLI maps this to exit code 1.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure (non-convergence, singular system, no signal).
/// The CLI maps this to exit code 2.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-fatal diagnostics accumulated by loaders and solvers.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
    if (sink != nullptr) {
        sink->push_back(std::move(message));
    }
}

}  // namespace legp
