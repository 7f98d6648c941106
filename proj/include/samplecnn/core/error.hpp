#ifndef SAMPLECNN_CORE_ERROR_HPP
#define SAMPLECNN_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace samplecnn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad configuration or usage (CLI exit code 1).
struct ConfigError : Error {
  using Error::Error;
};

/// Anything wrong with input data or files (CLI exit code 2).
struct DataError : Error {
  using Error::Error;
};

struct FormatError : DataError {
  using DataError::DataError;
};

struct UnsupportedError : DataError {
  using DataError::DataError;
};

/// Malformed row/line in a text file; message names the line number.
struct ParseError : DataError {
  using DataError::DataError;
};

struct ShapeError : Error {
  using Error::Error;
};

struct StatsError : Error {
  using Error::Error;
};

struct CheckpointError : DataError {
  using DataError::DataError;
};

struct EvalError : Error {
  using Error::Error;
};

/// Non-finite loss or similar numerical failure (CLI exit code 3).
struct NumericError : Error {
  using Error::Error;
};

} // namespace samplecnn

#endif
