#pragma once

#include <stdexcept>
#include <string>

namespace qdepth {

// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid dimensions incompatible with the requested level count or patch size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite or out-of-domain input value.
class ValueError : public Error {
 public:
  using Error::Error;
};

class LevelError : public Error {
 public:
  using Error::Error;
};

// Mismatched shapes or channel counts between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Inputs are well formed but the result is undefined (all pixels invalid, zero mean).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class EmptyError : public Error {
 public:
  using Error::Error;
};

// Malformed byte stream or file header.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A structurally invalid forest.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdepth
