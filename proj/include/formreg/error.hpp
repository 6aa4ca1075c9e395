#pragma once

#include <stdexcept>
#include <string>

namespace formreg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not fit the operation (non-square, mismatched sizes).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the operation's domain (jordan_block(0), mixed scalar specs, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A sesquilinear form was requested over the real field.
class InvalidFormError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition (e.g. a reduction step on a nonsingular matrix).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A value failed one of its structural invariants.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace formreg
