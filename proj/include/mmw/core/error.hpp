#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmw {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with input data: schema, parsing, labels, capture structure.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Problems in numeric fitting or training.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : DataError("row " + std::to_string(row) + ", column '" + column + "': " + what),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class LabelError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateCaptureError : public DataError {
 public:
  using DataError::DataError;
};

class StratificationError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid caller-supplied configuration or parameter (k, bins, sizes...).
class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

/// Input vector/window does not fit the model (dimension, non-finite values).
class InputError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class FitError : public NumericError {
 public:
  using NumericError::NumericError;
};

class TrainingError : public NumericError {
 public:
  TrainingError(std::size_t epoch, const std::string& what)
      : NumericError("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace mmw
