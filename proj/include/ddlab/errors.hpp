#pragma once

#include <stdexcept>
#include <string>

namespace ddlab {

/// Gram matrix (or penalized system) numerically rank-deficient.
class SingularSystemError : public std::runtime_error {
public:
    explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// Gradient iteration left the stable region.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Stepsize/curvature combination violates the stability precondition.
class StabilityError : public std::invalid_argument {
public:
    explicit StabilityError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace ddlab
