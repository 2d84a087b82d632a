#pragma once

#include <stdexcept>
#include <string>

namespace scnet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor extents disagree with what an operation requires.
struct ShapeError : Error {
  using Error::Error;
};

// Geometry bookkeeping (lengths, strides, paddings) is inconsistent.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid configuration value; message names the offending field.
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// NaN/Inf surfaced from a kernel; always a bug or diverged training.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace scnet
