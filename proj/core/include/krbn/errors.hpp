#pragma once

#include <stdexcept>
#include <string>

namespace krbn {

// Base of every error raised by the library. Callers that only need to know
// "something in krbn failed" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model or algorithm parameter lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// An argument violates an operation's precondition (empty input, bad grid...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Evaluation outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quadrature non-convergence, step-size underflow, degenerate regression.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A system description fails one of its structural hypotheses.
class ModelError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Not enough samples for the requested statistic.
class StatisticalError : public Error {
 public:
  using Error::Error;
};

// Density support escapes the evaluation window.
class WindowError : public Error {
 public:
  using Error::Error;
};

// A verification check was run and its assertion does not hold.
class CheckFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace krbn
