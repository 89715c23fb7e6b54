#pragma once

#include <stdexcept>
#include <string>

namespace taxledger {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed canonical encoding (truncated input, non-canonical scalar,
/// invalid group element, trailing bytes).
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Inputs whose lengths or arities disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied an argument outside the operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace taxledger
