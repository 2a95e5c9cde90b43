#pragma once

#include <stdexcept>
#include <string>

namespace eagle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes or channel counts do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An operation that needs at least one element received none.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Geometric input cannot determine a unique answer (collinear points, zero weights).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A pixel lookup fell outside the image or hit an invalid depth.
class InvalidSampleError : public Error {
 public:
  using Error::Error;
};

/// The 2D stage produced no temporal interval, so there is nothing to lift to 3D.
class NoDetectionError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario, config or track file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace eagle
