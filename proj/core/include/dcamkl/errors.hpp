#pragma once

#include <stdexcept>
#include <string>

namespace dcamkl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; the message names the offending line.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Between-class scatter or between-set covariance collapsed to zero rank.
class DegenerateFusionError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double violation)
      : Error(what), violation_(violation) {}

  double violation() const noexcept { return violation_; }

 private:
  double violation_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcamkl
