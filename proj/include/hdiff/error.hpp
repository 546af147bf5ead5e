#pragma once

#include <stdexcept>
#include <string>

namespace hdiff {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input/specification problems (bad measure data, bad config). CLI exit 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical failures (non-convergence, bracketing failure, ...). CLI exit 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

class InvalidMeasure : public InputError {
public:
    using InputError::InputError;
};

/// Parse failure of a measure or experiment document, anchored to a line.
class ParseError : public InputError {
public:
    ParseError(int line, const std::string& field, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + field + ": " + what),
          line_(line), field_(field) {}
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

class Degenerate : public InputError {
public:
    using InputError::InputError;
};

class AssumptionViolated : public InputError {
public:
    using InputError::InputError;
};

class OutOfDomain : public InputError {
public:
    using InputError::InputError;
};

class InvalidQ : public InputError {
public:
    using InputError::InputError;
};

class Precondition : public InputError {
public:
    using InputError::InputError;
};

class UnknownIdentity : public InputError {
public:
    using InputError::InputError;
};

class NotApplicable : public InputError {
public:
    using InputError::InputError;
};

class NonIntegrable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CrossCheckFailed : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BracketFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GroundStateUnavailable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ResidualExceeded : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class HypothesisFailed : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GridTooCoarse : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateConditioning : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace hdiff
