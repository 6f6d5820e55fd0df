#pragma once

#include <stdexcept>
#include <string>

namespace polyhjb {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Incompatible shapes. The message names the offending dimension.
class DimensionError : public Error {
public:
    DimensionError(const std::string& what_dim, long expected, long got)
        : Error("dimension mismatch: " + what_dim + " expected " +
                std::to_string(expected) + ", got " + std::to_string(got)),
          expected_(expected), got_(got) {}
    long expected() const { return expected_; }
    long got() const { return got_; }

private:
    long expected_;
    long got_;
};

/// Index outside the valid range of a container or grid.
class IndexError : public Error {
public:
    using Error::Error;
};

/// A linear operator turned out to be (numerically) singular or a pencil
/// unstable where stability was required.
class SingularOperatorError : public Error {
public:
    using Error::Error;
};

/// An iteration failed to reach its tolerance; carries the last residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double last_residual)
        : Error(msg + " (last residual " + std::to_string(last_residual) + ")"),
          last_residual_(last_residual) {}
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

/// A documented size cap was exceeded (dense paths are desk-scale only).
class GuardError : public Error {
public:
    using Error::Error;
};

/// File format or filesystem problem; message carries file and line context.
class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or argument value.
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace polyhjb
