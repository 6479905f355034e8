#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lieop {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is a 0-based byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// exp/sin/cos received (or would receive after substitution) a non-affine argument.
class NonAffineError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a parameter value was violated (out of range, singular, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace lieop
