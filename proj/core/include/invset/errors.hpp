#pragma once

#include <stdexcept>
#include <string>

namespace invset {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-unit normal, bad sizes, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A convex body description is degenerate.
class DegenerateBody : public Error {
public:
    using Error::Error;
};

/// A coefficient or data sampler returned an unusable value.
class SamplerFailure : public Error {
public:
    using Error::Error;
};

/// An iterative procedure did not reach its tolerance.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}

    [[nodiscard]] double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// The per-mode spectral problem of the half-space solver is not solvable as posed.
class SpectralFailure : public Error {
public:
    using Error::Error;
};

}  // namespace invset
