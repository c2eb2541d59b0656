#pragma once

#include <stdexcept>
#include <string>

namespace moire {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Strain parameter or twist angle produces no moire pattern (theta = 0 mod pi, eps = 0).
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

/// The two layers are identical: A1^-1 - A2^-1 vanishes.
class NoMoire : public Error {
 public:
  using Error::Error;
};

/// A GSFE model that does not produce a double-well profile along a wall path.
class ModelInconsistency : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite values met during a line search or quadrature.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The order parameter never reaches +-1/2 inside the cut.
class UnresolvedWall : public Error {
 public:
  using Error::Error;
};

/// The cut crosses more than one wall (non-monotone order parameter).
class AmbiguousCut : public Error {
 public:
  using Error::Error;
};

/// Configuration file violates the schema. `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace moire
