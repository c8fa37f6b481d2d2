#pragma once

#include <stdexcept>
#include <string>

namespace srcest {

// Base for every error raised by the library. The CLI maps each kind to an
// exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: invalid node id, empty observation set, t below the
// feasible range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Some explicit node cannot be reached from the node being evaluated.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

// The graph does not have the shape the operation requires (e.g. not a tree).
class StructureError : public Error {
 public:
  using Error::Error;
};

// A path or tree violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An exhaustive oracle was asked to run beyond its guard.
class ScaleRefusal : public Error {
 public:
  using Error::Error;
};

// Malformed config or data file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant; indicates a bug, not bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace srcest
