#pragma once

#include <stdexcept>
#include <string>

namespace daent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed weights: NaN, negative, non-finite, or mass off by more than 1e-9.
class InvalidDensity : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A marginal composed with a kernel that conditions on the other axis.
class AxisMismatch : public Error {
 public:
  using Error::Error;
};

class PositivityViolation : public Error {
 public:
  using Error::Error;
};

class TargetNotPositive : public Error {
 public:
  using Error::Error;
};

class StateNotRetained : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class ZeroConditional : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

}  // namespace daent
