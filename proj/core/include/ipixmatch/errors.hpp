#pragma once

#include <stdexcept>
#include <string>

namespace ipix {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or otherwise unusable numeric input.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A parameter outside its documented range (tau, temperature, momentum...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

// Mismatched tensor/layer shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input whose result is mathematically undefined (constant Pearson vector).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// KL(u||v) with v_i = 0 where u_i > 0.
class DivergenceUndefinedError : public Error {
 public:
  using Error::Error;
};

// Backward called with a cache that does not match the parameters.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

// Corrupt or truncated on-disk blob.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// On-disk format version not understood.
class VersionError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (unknown key, missing field, out-of-range value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ipix
