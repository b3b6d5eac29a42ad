#pragma once

#include <stdexcept>
#include <string>

namespace qdsim {

// Categories map one-to-one onto CLI exit codes.
enum class ErrorKind { Domain, Numeric, Config, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Input outside an operation's documented domain.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// Numerical failure: step-size blowup, singular normal equations, missing oscillation.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Malformed dataset file: missing header, ragged rows, missing metadata.
class SchemaError : public ConfigError {
 public:
  explicit SchemaError(const std::string& what) : ConfigError("schema: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace qdsim
