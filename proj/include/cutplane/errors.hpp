#pragma once

#include <stdexcept>
#include <string>

namespace cutplane {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gram matrix A^T W A failed to factor.
struct RankDeficientError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

// Woodbury inner system or similar small solve is singular.
struct SingularSystemError : Error {
  using Error::Error;
};

// An update action breaks the short-sequence / small-update contract.
struct AssumptionViolation : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// A separation oracle returned a halfspace that does not cut the query.
struct ProtocolError : Error {
  using Error::Error;
};

struct GeometryError : Error {
  using Error::Error;
};

struct EvaluationError : Error {
  using Error::Error;
};

// A solver broke one of its own invariants.
struct InternalError : Error {
  using Error::Error;
};

// A solver ran out of budget without a usable answer.
struct ConvergenceError : Error {
  using Error::Error;
};

}  // namespace cutplane
