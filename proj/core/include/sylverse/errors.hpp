#pragma once

#include <stdexcept>
#include <string>

namespace sylverse {

// Shape mismatch between operands (rows/cols or vector length).
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// An argument violates a documented precondition (range, sign, emptiness).
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A structured input (JSON document, model description) failed validation.
// `field` names the offending entry.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& msg, std::string field)
      : std::runtime_error(msg), field(std::move(field)) {}
  std::string field;
};

// A linear solve met a pivot too small to trust. `pivot` is the row index.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& msg, int pivot)
      : std::runtime_error(msg), pivot(pivot) {}
  int pivot;
};

// A tolerance could not be met within the evaluation budget. `achieved` is
// the best error estimate reached.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& msg, double achieved)
      : std::runtime_error(msg), achieved(achieved) {}
  double achieved;
};

// An adaptive integrator drove its step size below representable resolution.
class StiffnessError : public std::runtime_error {
 public:
  explicit StiffnessError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sylverse
