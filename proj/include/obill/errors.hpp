#pragma once

#include <stdexcept>
#include <string>

namespace obill {

/// Base class for every geometric failure raised by the library.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition (off-manifold point, non-unit
/// vector, line cutting the surface, ...).
class DomainError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Input sits on the boundary of the billiard table (a line tangent to the
/// surface within tolerance).
class BoundaryError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Operation is not defined for the requested curvature.
class UnsupportedError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Should not happen for valid inputs; signals a numerical breakdown.
class InternalError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

}  // namespace obill
