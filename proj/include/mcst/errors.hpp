#pragma once

#include <stdexcept>
#include <string>

namespace mcst {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Patch or scan geometry inconsistent with the data it is applied to.
class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

// Malformed or mismatched on-disk artifact (bad magic, truncated file, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A model or state invariant does not hold (non-unitary transform, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a failed decomposition.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Bad configuration values or keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcst
