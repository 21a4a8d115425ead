#pragma once

#include <stdexcept>
#include <string>

namespace ngcn {

/// Base type for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown keys, invalid values, malformed options.
struct ConfigError : Error {
  using Error::Error;
};

/// Bad or inconsistent input data: parse failures, violated preconditions.
struct DataError : Error {
  using Error::Error;
};

/// Training-time failure: divergence, non-finite gradients.
struct TrainError : Error {
  using Error::Error;
};

}  // namespace ngcn
