#pragma once

#include <stdexcept>
#include <string>

namespace psm {

// Input data or configuration does not satisfy a schema or precondition.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent study spec file.
class SpecError : public DataError {
 public:
  using DataError::DataError;
};

// A numerical routine could not produce a trustworthy answer
// (singular system, separation, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SeparationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace psm
