#pragma once

#include <stdexcept>
#include <string>

namespace keyscope {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (hyperparameters, ratios, ranges).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problems with input data: malformed files, bad labels, missing caches.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class LabelError : public DataError {
 public:
  using DataError::DataError;
};

/// Tensor extents that do not fit an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input shorter than the minimum an operation needs; the message names the minimum.
class TooShortError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or cache file that cannot be loaded.
class LoadError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace keyscope
