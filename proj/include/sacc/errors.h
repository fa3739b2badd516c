#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sacc {

// Base of every error raised by the library. The CLI maps NumericalError to
// exit status 3 and everything else to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model parameters (IdmParams, ControllerParams).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Sequence lengths or matrix shapes that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration (grids, schedules, scenario specs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A playback law was asked for a sample past the end of its series.
class PlaybackExhaustedError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Serialized files with a bad magic, version, or truncated body.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UndefinedBaselineError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericalError {
 public:
  explicit DivergenceError(int epoch)
      : NumericalError("non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace sacc
