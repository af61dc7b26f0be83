#pragma once

#include <stdexcept>
#include <string>

namespace limitnet {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or array shapes disagree with what an operation or file declares.
class ShapeError : public Error {
 public:
  ShapeError(const std::string& what, int layer = -1)
      : Error(layer >= 0 ? "layer " + std::to_string(layer) + ": " + what : what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

// A NaN or infinity appeared during inference.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, int layer = -1)
      : Error(layer >= 0 ? "layer " + std::to_string(layer) + ": " + what : what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

// Binary file does not start with the expected magic tag.
class BadMagicError : public Error {
 public:
  using Error::Error;
};

// CRC32 trailer mismatch (also raised for truncated files).
class ChecksumError : public Error {
 public:
  using Error::Error;
};

// A file declares shapes that do not match the arrays it carries.
class ShapeInconsistencyError : public Error {
 public:
  using Error::Error;
};

// Missing or invalid configuration (files, options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed bitstream or packet.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace limitnet
