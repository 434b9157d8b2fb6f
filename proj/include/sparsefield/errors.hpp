#pragma once

#include <stdexcept>
#include <string>

namespace sparsefield {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or arguments: invalid layouts, dimension mismatches,
// out-of-domain queries. CLI maps these to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};
struct DimensionError : ConfigError {
  using ConfigError::ConfigError;
};
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};

// Numerical failures: diverging training, degenerate data, rank-deficient
// systems. CLI exit code 3.
struct NumericalError : Error {
  using Error::Error;
};

// Filesystem, parse, and schema problems. CLI exit code 4.
struct IoError : Error {
  using Error::Error;
};
struct ParseError : IoError {
  using IoError::IoError;
};
struct SchemaError : IoError {
  using IoError::IoError;
};

}  // namespace sparsefield
