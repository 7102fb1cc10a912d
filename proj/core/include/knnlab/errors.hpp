#pragma once

#include <stdexcept>
#include <string>

namespace knnlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnsupportedKernelSpec : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class IntegrationBudgetExceeded : public Error {
public:
  using Error::Error;
};

class InvalidData : public Error {
public:
  using Error::Error;
};

class NotEnoughPoints : public Error {
public:
  using Error::Error;
};

/// The k-th neighbor distance is zero: the query coincides with at least k
/// sample points. Carries the (zero) radius so callers can apply a policy.
class DegenerateRadius : public Error {
public:
  explicit DegenerateRadius(double radius)
      : Error("k-NN radius is zero (query coincides with >= k sample points)"),
        radius_(radius) {}

  double radius() const noexcept { return radius_; }

private:
  double radius_;
};

/// A schedule parameter violates the bounds of the assumption that governs it.
class InvalidSchedule : public Error {
public:
  using Error::Error;
};

class MissingResponses : public Error {
public:
  using Error::Error;
};

class ModelMisconfigured : public Error {
public:
  using Error::Error;
};

class OutsideEvaluationBox : public Error {
public:
  using Error::Error;
};

class InvalidTarget : public Error {
public:
  using Error::Error;
};

class StudyAborted : public Error {
public:
  using Error::Error;
};

class PreconditionFailed : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

}  // namespace knnlab
