#pragma once

#include <stdexcept>
#include <string>

namespace selftune {

// Input outside the mathematical domain of an operation (theta not in (0,1),
// negative distance, non-finite argument, zero denominator).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two vectors (or a vector and a problem) disagree on dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An objective returned a non-finite value or threw.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or command-line usage. Maps to exit status 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Report files could not be written. Maps to exit status 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A self-check failed (e.g. a report summary disagrees with its rows).
// Maps to exit status 4.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace selftune
