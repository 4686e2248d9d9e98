#pragma once

#include <stdexcept>
#include <string>

namespace pinoise {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A spec/struct failed validation (non-PSD covariance, ratio outside [0,1], ...).
class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

/// CSV or other input could not be parsed. Messages name the row and column.
class IngestionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

/// A probability table or distribution does not sum to one or has negative mass.
class InvalidDistributionError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration is malformed or references an unusable grid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pinoise
