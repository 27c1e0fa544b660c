#pragma once

#include <stdexcept>
#include <string>

namespace lcqp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural size disagreement between problem fields.
struct DimensionMismatch : Error {
  using Error::Error;
};

// Hessian fails the symmetry check.
struct NonSymmetricHessian : Error {
  using Error::Error;
};

// Hessian fails the positive-definiteness check (Cholesky breakdown).
struct IndefiniteHessian : Error {
  using Error::Error;
};

// Non-finite or otherwise ill-formed numeric entry.
struct InvalidValue : Error {
  using Error::Error;
};

// Malformed problem file (syntax, missing or mistyped field).
struct ParseError : Error {
  using Error::Error;
};

// A point handed to the stationarity certifier violates the constraints.
struct NotFeasible : Error {
  using Error::Error;
};

// Brute-force oracle invoked beyond its enumeration limits.
struct OracleCapExceeded : Error {
  using Error::Error;
};

// Solution vector does not match the transcription's variable layout.
struct IndexMapMismatch : Error {
  using Error::Error;
};

}  // namespace lcqp
