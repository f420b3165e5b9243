#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xlim {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inputs whose shapes (grids, vector lengths) do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Input inside the mathematical domain but outside a model's range of validity.
class ValidityError : public Error {
public:
    using Error::Error;
};

/// A model predicted something unphysical (negative or non-finite expectation).
class ModelError : public Error {
public:
    using Error::Error;
};

/// A linear map or yield chain that has collapsed to zero.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Posterior or scan range problems.
class RangeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Minimizer gave up; carries the per-restart trace for diagnostics.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<std::string> trace)
        : Error(what), trace_(std::move(trace)) {}

    const std::vector<std::string>& trace() const noexcept { return trace_; }

private:
    std::vector<std::string> trace_;
};

/// Text input that failed validation; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace xlim
