#pragma once

#include <stdexcept>
#include <string>

namespace whlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

// e^{ax} or a weight factor left the double range.
struct OverflowError : Error {
  using Error::Error;
};

// Shift amount is not a multiple of the grid step.
struct AlignmentError : Error {
  using Error::Error;
};

struct SupportError : Error {
  using Error::Error;
};

// Level a outside the admissible strip.
struct StripError : Error {
  using Error::Error;
};

struct BracketError : Error {
  using Error::Error;
};

struct GridError : Error {
  using Error::Error;
};

// Mollifier scale too coarse for the grid or for deconvolution.
struct ScaleError : Error {
  using Error::Error;
};

struct WindowingError : Error {
  using Error::Error;
};

struct ProbeError : Error {
  using Error::Error;
};

struct WeightError : Error {
  using Error::Error;
};

// Configuration problem; pointer is a JSON pointer to the offending field.
struct ConfigError : Error {
  ConfigError(std::string pointer, const std::string& what)
      : Error(pointer + ": " + what), pointer(std::move(pointer)) {}
  std::string pointer;
};

}  // namespace whlab
