#pragma once

#include <stdexcept>
#include <string>

namespace peapod {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed configs, violated preconditions.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A requested dense object would exceed the configured dimension limits.
class DimensionLimit : public Error {
 public:
  using Error::Error;
};

// A planning problem has no solution within its search bounds.
class Infeasible : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace peapod
