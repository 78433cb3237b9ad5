#pragma once

#include <stdexcept>
#include <string>

namespace transop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two objects were discretized on different grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// A map sent a point outside the state space.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Weights or probabilities that should sum to one do not.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

}  // namespace transop
