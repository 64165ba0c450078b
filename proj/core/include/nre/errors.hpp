#pragma once

#include <stdexcept>
#include <string>

namespace nre {

/// Base for numerical failures that callers may want to catch and count.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A noisy noise-canceling expectation has a different sign than its
/// noiseless value (or is zero), so the log-ratio is undefined.
class SignViolationError : public Error {
 public:
  using Error::Error;
};

/// The target series has zero dispersion while the auxiliary series does not.
class DegenerateDispersionError : public Error {
 public:
  using Error::Error;
};

class FitFailureError : public Error {
 public:
  using Error::Error;
};

}  // namespace nre
