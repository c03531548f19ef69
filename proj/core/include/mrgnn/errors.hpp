#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrgnn {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes (matmul, add, concat, ...). Message names both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (widths, fractions, unknown flags, bad config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Structural preconditions violated (bad one-hot targets, invalid graphs, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required (NaN loss, corrupt payloads).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed input data; `line` is 1-based when it refers to a line-oriented file.
class DataError : public Error {
 public:
  DataError(const std::string& msg, std::size_t line_no = 0)
      : Error(msg), line(line_no) {}
  std::size_t line;
};

// Filesystem problems: missing files, short reads, failed writes.
class IoError : public Error {
 public:
  using Error::Error;
};

// A metric is mathematically undefined on the given input (e.g. AUC with a
// single class present).
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrgnn
