#pragma once

#include <stdexcept>
#include <string>

namespace stiffkrylov {

/// Structural problems with the input system or netlist (exit code 1 at the CLI).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime numerical failures: singular pivots, non-convergence, overflow (exit code 2).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// g_inverse at lambda == 1 maps to an infinite shift; distinct from overflow.
struct InfiniteShiftError : NumericalError {
    explicit InfiniteShiftError(const std::string& what) : NumericalError(what) {}
};

}  // namespace stiffkrylov
