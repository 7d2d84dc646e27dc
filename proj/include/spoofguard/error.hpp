#pragma once

#include <stdexcept>
#include <string>

namespace spoofguard {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes: IoError and FormatError exit 2, everything else exits 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File contents are malformed or use an unsupported encoding.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Two operands that must share a shape do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The input makes the requested quantity undefined (e.g. a zero denominator).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A dataset, manifest, or feature table violates its structural contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace spoofguard
