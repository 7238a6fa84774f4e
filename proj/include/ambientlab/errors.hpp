#pragma once
#include <stdexcept>
#include <string>

namespace ambientlab {

// Error taxonomy: every throw site picks the category that tells the caller
// whose fault the failure is and whether different inputs could help.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed call: wrong sizes, mismatched charts, out-of-range arguments.
struct UsageError : Error {
  using Error::Error;
};

// Input is structurally fine but mathematically unusable here
// (non-invertible metric, log of a non-positive leading value, ...).
struct SingularInputError : Error {
  using Error::Error;
};

// The requested output needs more jet orders than the input carries.
struct InsufficientOrderError : Error {
  using Error::Error;
};

// The requested quantity does not exist at this (dimension, order) combination.
struct CapabilityError : Error {
  using Error::Error;
};

// An internal cross-check failed; indicates a bug, not bad input.
struct ConsistencyError : Error {
  using Error::Error;
};

// Bad external input: unparsable expression, malformed JSON, unknown name.
struct InputError : Error {
  using Error::Error;
};

}  // namespace ambientlab
