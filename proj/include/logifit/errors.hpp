#pragma once

#include <stdexcept>
#include <string>

namespace logifit {

/// Raised when an expression cannot be evaluated (unbound name, division by
/// zero, log of a non-positive value, non-finite result).
struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised by the parsers; carries the source position of the offending token.
struct ParseError : std::runtime_error {
    int line;
    int column;
    std::string expected;
    std::string found;

    ParseError(int line_, int column_, std::string expected_, std::string found_)
        : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                             std::to_string(column_) + ": expected " + expected_ +
                             ", found " + found_),
          line(line_), column(column_),
          expected(std::move(expected_)), found(std::move(found_)) {}

    ParseError(int line_, int column_, const std::string& msg)
        : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                             std::to_string(column_) + ": " + msg),
          line(line_), column(column_), expected(), found() {}
};

/// Raised on semantically invalid inputs (inconsistent dimensions, bad bounds,
/// malformed observation/target files, missing parameters).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a simulation cannot proceed (negative propensity, state blow-up,
/// event-count explosion, empty time grid).
struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a linear-algebra step fails beyond repair (factorization that
/// survives no jitter level).
struct NumericsError : std::runtime_error {
    explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace logifit
