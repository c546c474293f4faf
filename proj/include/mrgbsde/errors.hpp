#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mrgbsde {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or violated construction invariant (VolBounds, Grid, CFL, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Requested time is not a grid node.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Declared constants of a catalog object do not hold on the sampled net.
class CatalogError : public Error {
public:
    using Error::Error;
};

/// Input fails a precondition of the called solver (start point, admissibility, ordering).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Iteration did not reach tolerance. Carries the recorded deltas.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> deltas)
        : Error(what), deltas_(std::move(deltas)) {}
    const std::vector<double>& deltas() const { return deltas_; }

private:
    std::vector<double> deltas_;
};

/// Non-finite value reached a numeric kernel.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace mrgbsde
