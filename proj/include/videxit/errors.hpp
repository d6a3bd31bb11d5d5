// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace videxit {

// Base of every error the engine throws. The C API maps each subclass onto a
// distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or parameter mismatch between a spec and its inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input values the engine refuses to process (non-finite, too short).
class DataError : public Error {
 public:
  using Error::Error;
};

// Caller misuse: empty inputs, out-of-range thresholds, bad flags.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Structured-text spec that cannot be parsed or validated. `location` is a
// JSON pointer to the offending node.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location.empty() ? what : location + ": " + what),
        location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

enum class FormatErrorKind {
  io,
  bad_magic,
  bad_version,
  truncated,
  duplicate_name,
  bad_dtype,
  dims_mismatch,
  non_finite,
};

const char* to_string(FormatErrorKind kind) noexcept;

// Malformed binary container (weights or clip file).
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

// Head training produced a non-finite loss or parameter.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace videxit
