#pragma once

#include <stdexcept>
#include <string>

namespace spinavg {

// Thrown when a request is valid in principle but outside the supported
// size/feasibility envelope (e.g. dense baseline beyond N=12).
struct feasibility_error : std::runtime_error {
    explicit feasibility_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a numerical routine fails its own accuracy contract
// (non-convergence, singular solve, imaginary residue, stiffness).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinavg
