#pragma once

#include <stdexcept>
#include <string>

namespace conecap {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller-supplied value lies outside the documented domain.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Midpoint requested for a pair of (numerically) antipodal points, where
/// the connecting geodesic is not unique.
class DegenerateGeodesicError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of the operation was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure hit its iteration cap without meeting its
/// termination criterion.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace conecap
