#pragma once

#include <stdexcept>
#include <string>

namespace vfd {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterOutOfRange : Error {
    using Error::Error;
};

// --- profile / self-similar ---

/// Profile integration produced f <= 0. Usually means the step is too large.
struct NonPositiveProfile : Error {
    using Error::Error;
};

/// Analytic tail correction exceeds 5% of the grid quadrature; r_max too small.
struct TailNotResolved : Error {
    using Error::Error;
};

struct TimeBeyondExtinction : Error {
    using Error::Error;
};

// --- green ---

struct OutOfInterval : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

// --- solver ---

/// Newton failed to converge within the iteration budget; the time step is
/// too large for the current state.
struct NewtonDiverged : Error {
    using Error::Error;
};

/// Positivity floor was still binding at convergence.
struct PositivityLost : Error {
    using Error::Error;
};

struct NonPositiveInitial : Error {
    using Error::Error;
};

// --- experiments ---

struct WindowOutsideDomain : Error {
    using Error::Error;
};

struct NotNearExtinction : Error {
    using Error::Error;
};

struct HypothesisViolated : Error {
    using Error::Error;
};

struct ProbeInsideWindow : Error {
    using Error::Error;
};

// --- config ---

struct ParseError : Error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& msg, int line_, int column_)
        : Error(msg + " (line " + std::to_string(line_) + ", column " +
                std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
};

struct ValidationError : Error {
    std::string key;
    ValidationError(const std::string& key_, const std::string& msg)
        : Error("config key '" + key_ + "': " + msg), key(key_) {}
};

} // namespace vfd
