#pragma once

#include <stdexcept>
#include <string>

namespace rankest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Snapshot or matrix dimensions disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An ODE integration left the admissible region (blow-up or sign change).
class IntegrationError : public Error {
public:
    using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A root-finding bracket shows no sign change.
class BracketingError : public Error {
public:
    using Error::Error;
};

/// Signal strength at or below the phase-transition point where a
/// supercritical one is required.
class SubcriticalError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace rankest
