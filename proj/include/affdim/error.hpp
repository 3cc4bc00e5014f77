#pragma once

#include <stdexcept>
#include <string>

namespace affdim {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or non-finite input data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but violates an operation's precondition
// (non-contractive system, singular matrix, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An enumeration or pair budget would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Fewer usable scales than a regression needs.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// A numerical procedure lost all significance (e.g. a vanishing triangular
// factor in a QR cocycle).
class NumericalFault : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

}  // namespace affdim
