#pragma once

#include <stdexcept>
#include <string>

namespace mrn {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class NoSuchEdge : public Error {
 public:
  using Error::Error;
};

class NoSuchNode : public Error {
 public:
  using Error::Error;
};

class DegenerateDistance : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class EmptyScope : public Error {
 public:
  using Error::Error;
};

// Raised when a subproblem built from a valid state cannot be solved.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrn
