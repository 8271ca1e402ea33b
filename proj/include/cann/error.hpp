#pragma once

#include <stdexcept>
#include <string>

namespace cann {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input data (price files, market vectors).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value. `path()` is a JSON-pointer-like location.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, std::string message)
      : Error(path + ": " + message), path_(std::move(path)), message_(std::move(message)) {}
  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string path_;
  std::string message_;
};

/// A loss argument left the domain of the logarithm (only reachable with a
/// leverage override that admits bankruptcy).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace cann
