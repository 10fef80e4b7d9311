#pragma once

#include <stdexcept>
#include <string>

namespace tgn {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape or axis mismatch between tensors.
struct DimensionError : Error {
  using Error::Error;
};

/// Invalid configuration: unknown keys, out-of-range values, unknown presets.
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed input file (sequence, manifest, checkpoint).
struct ParseError : Error {
  using Error::Error;
};

/// API misuse: calling into a component in a state it does not support.
struct ContractError : Error {
  using Error::Error;
};

/// Numerical failure at run time (non-finite loss or activations).
struct NumericError : Error {
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace tgn
