#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qrng {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file was readable but its contents do not follow the expected format.
/// `offset()` is the byte (or character) position of the first offending item.
class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : IoError(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// An estimator would divide by zero or otherwise has too few events.
class InsufficientStatistics : public Error {
 public:
  using Error::Error;
};

/// The measured min-entropy does not support any extraction ratio.
class InsufficientEntropy : public Error {
 public:
  using Error::Error;
};

}  // namespace qrng
