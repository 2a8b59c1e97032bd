#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace zsl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. Carries the 1-based row number when
// the problem is attributable to a single row.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::optional<std::size_t> row = std::nullopt);
  std::optional<std::size_t> row() const { return row_; }

 private:
  std::optional<std::size_t> row_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A label configuration cannot be rendered for a class (no descriptor words).
class UnsupportedLabelError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class AuthError : public BackendError {
 public:
  explicit AuthError(const std::string& what) : BackendError(what, false) {}
};

class StatsError : public Error {
 public:
  using Error::Error;
};

}  // namespace zsl
