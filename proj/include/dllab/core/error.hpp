#pragma once

#include <stdexcept>
#include <string>

namespace dllab {

/// Error categories double as process exit codes for the CLI.
enum class ErrorKind : int {
  config = 2,
  usage = 3,
  digest = 4,
  numerics = 5,
  io = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, "config error: " + what) {}
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, "usage error: " + what) {}
};

struct DigestError : Error {
  explicit DigestError(const std::string& what) : Error(ErrorKind::digest, "digest mismatch: " + what) {}
};

struct NumericsError : Error {
  explicit NumericsError(const std::string& what) : Error(ErrorKind::numerics, "numerics error: " + what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, "io error: " + what) {}
};

}  // namespace dllab
