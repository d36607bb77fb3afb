#pragma once

#include <stdexcept>
#include <string>

namespace sdcn {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a function argument was violated.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// An autoencoder size chain is inconsistent (not strictly decreasing, etc.).
class InvalidArchitectureError : public InvalidArgumentError {
 public:
  using InvalidArgumentError::InvalidArgumentError;
};

/// Matrix/vector dimensions do not match the declared contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input data is unusable (non-finite values, degenerate content).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An operation was called in an invalid order, or numeric state is poisoned.
class StateError : public Error {
 public:
  using Error::Error;
};

/// A run configuration failed validation (missing path, unknown key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File container errors. Each failure mode is distinct so callers and tests
// can tell them apart.

class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad magic bytes or a structurally malformed container.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// Container version is not one this build can read.
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

/// Payload checksum does not match the stored CRC32.
class ChecksumError : public IoError {
 public:
  using IoError::IoError;
};

/// File ends before the declared payload does.
class TruncatedError : public IoError {
 public:
  using IoError::IoError;
};

/// Declared dimensions are zero, negative, or overflow the address space.
class DimensionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace sdcn
