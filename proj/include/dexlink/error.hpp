#pragma once

#include <stdexcept>
#include <string>

namespace dexlink {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(actual)) {}
};

class UnknownFinger : public Error {
 public:
  using Error::Error;
};

class ZeroReference : public Error {
 public:
  ZeroReference() : Error("ADC reference code is zero") {}
};

class EmptyTable : public Error {
 public:
  EmptyTable() : Error("calibration table has fewer than two knots") {}
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidRate : public Error {
 public:
  using Error::Error;
};

class NonFiniteTarget : public Error {
 public:
  using Error::Error;
};

class NegativeForce : public Error {
 public:
  using Error::Error;
};

class InvalidDt : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised by the demonstration reader; carries the index of the last record
/// that decoded cleanly (-1 when none did) and the byte offset of the failure.
class CorruptRecord : public Error {
 public:
  CorruptRecord(long long last_valid_index, std::size_t file_offset, const std::string& what)
      : Error("corrupt record after index " + std::to_string(last_valid_index) + " at byte " +
              std::to_string(file_offset) + ": " + what),
        last_valid_index_(last_valid_index),
        file_offset_(file_offset) {}

  long long last_valid_index() const noexcept { return last_valid_index_; }
  std::size_t file_offset() const noexcept { return file_offset_; }

 private:
  long long last_valid_index_;
  std::size_t file_offset_;
};

class BindError : public Error {
 public:
  using Error::Error;
};

}  // namespace dexlink
