#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anisograph {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (zero dimensions, out-of-range rates, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Operation combined SE(2) and SO(3) elements.
class KindMismatchError : public Error {
 public:
  using Error::Error;
};

/// Matrix/signal dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Call sequence violated, e.g. backward before forward.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary container. `offset()` is the byte position where
/// decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace anisograph
