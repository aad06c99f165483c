#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fdedep {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfDomain : public Error {
public:
    explicit OutOfDomain(double t)
        : Error("evaluation point " + std::to_string(t) + " is outside the function domain"),
          t_(t) {}
    double where() const noexcept { return t_; }

private:
    double t_;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Syntax error in an expression; line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), message_(message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

class DelayOutOfRange : public Error {
public:
    DelayOutOfRange(double delay, double r)
        : Error("delay " + std::to_string(delay) + " outside [0, " + std::to_string(r) + "]"),
          delay_(delay) {}
    double delay() const noexcept { return delay_; }

private:
    double delay_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class StepUnderflow : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(int iterations, double last_residual)
        : Error("Picard iteration did not converge after " + std::to_string(iterations) +
                " iterations (last residual " + std::to_string(last_residual) + ")"),
          iterations_(iterations), last_residual_(last_residual) {}
    int iterations() const noexcept { return iterations_; }
    double last_residual() const noexcept { return last_residual_; }

private:
    int iterations_;
    double last_residual_;
};

/// A Picard iterate left A(a, beta): the bound M was underestimated.
class SelfMapViolation : public Error {
public:
    SelfMapViolation(int iteration, double norm, double beta)
        : Error("Picard iterate " + std::to_string(iteration) + " has sup-norm " +
                std::to_string(norm) + " >= beta " + std::to_string(beta)),
          iteration_(iteration), norm_(norm) {}
    int iteration() const noexcept { return iteration_; }
    double norm() const noexcept { return norm_; }

private:
    int iteration_;
    double norm_;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

class ProbeOutOfDomain : public Error {
public:
    using Error::Error;
};

} // namespace fdedep
