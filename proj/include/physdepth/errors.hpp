#pragma once

#include <stdexcept>
#include <string>

namespace physdepth {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Argument violates a documented precondition (non-finite value, dimension
/// mismatch, out-of-range configuration).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Projection was requested for a point at or behind the image plane.
class BehindCamera : public Error {
 public:
  using Error::Error;
};

/// Unprojection was requested with a non-positive depth.
class InvalidDepth : public Error {
 public:
  using Error::Error;
};

/// Malformed input document; the message carries location context
/// (line number, key, or JSON path).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An operation that needs at least one valid seed pixel received none.
class EmptyPrior : public Error {
 public:
  using Error::Error;
};

/// Two depth maps share no jointly valid pixel.
class EmptyOverlap : public Error {
 public:
  using Error::Error;
};

}  // namespace physdepth
