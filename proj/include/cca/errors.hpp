#pragma once

#include <stdexcept>
#include <string>

namespace cca {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// path model
struct TooFewWaypoints : Error {
  using Error::Error;
};
struct DuplicateWaypoint : Error {
  using Error::Error;
};
struct LambdaOutOfRange : Error {
  using Error::Error;
};
struct DegenerateTangent : Error {
  using Error::Error;
};

// elastic band
struct WindowTooSmall : Error {
  using Error::Error;
};
struct NodeInsideObstacle : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};

// decision
struct EgoTooSlow : Error {
  using Error::Error;
};
struct StaleBsm : Error {
  using Error::Error;
};

// v2v codec
struct BadMagic : Error {
  using Error::Error;
};
struct BadLength : Error {
  using Error::Error;
};
struct NonFiniteField : Error {
  using Error::Error;
};

// vehicle behaviors
struct UnknownProfile : Error {
  using Error::Error;
};

// scenario / trace files
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct UnknownKind : Error {
  using Error::Error;
};

}  // namespace cca
