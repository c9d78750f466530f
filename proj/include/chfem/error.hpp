#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chfem {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range or inconsistent input parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid mesh geometry (tangled, clockwise or non-conforming elements).
class GeometryError : public Error {
public:
    GeometryError(std::size_t element, const std::string& what)
        : Error("element " + std::to_string(element) + ": " + what), element_(element) {}
    std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

/// A field value left the admissible interval of an energy model.
class DomainError : public Error {
public:
    DomainError(const std::string& what, std::ptrdiff_t element = -1)
        : Error(element >= 0 ? "element " + std::to_string(element) + ": " + what : what),
          element_(element) {}
    std::ptrdiff_t element() const noexcept { return element_; }

private:
    std::ptrdiff_t element_;
};

/// Iterative method failure (non-convergence, breakdown, stagnation).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Krylov failure; keeps the best iterate seen.
class KrylovError : public NumericError {
public:
    KrylovError(const std::string& what, std::vector<double> best, int iterations)
        : NumericError(what), best_(std::move(best)), iterations_(iterations) {}
    const std::vector<double>& best_iterate() const noexcept { return best_; }
    int iterations() const noexcept { return iterations_; }

private:
    std::vector<double> best_;
    int iterations_;
};

/// Least-squares fit that cannot be carried out (too few or degenerate points).
class FitError : public Error {
public:
    using Error::Error;
};

/// Field does not have the shape a diagnostic requires (e.g. no sign change).
class ShapeError : public Error {
public:
    using Error::Error;
};

} // namespace chfem
