#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nomafl {

// Precondition violated by a caller-supplied value (bad distance, empty
// cohort, mismatched dimensions, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The bit budget cannot carry even the smallest valid payload.
class OverBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed compressed payload. `bit_offset` points at the first bit that
// could not be decoded.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t bit_offset)
      : std::runtime_error(what + " (bit offset " + std::to_string(bit_offset) + ")"),
        bit_offset_(bit_offset) {}

  std::size_t bit_offset() const noexcept { return bit_offset_; }

 private:
  std::size_t bit_offset_;
};

// Malformed dataset file. `byte_offset` is the file position of the problem.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class SchedulingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid experiment configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace nomafl
