#pragma once

#include <stdexcept>
#include <string>

namespace dicl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed manifest, config file, or command-line value.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Dataset or vector file violates its contract (unknown label, bad id, ...).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
};

/// Transport failure or malformed response from an HTTP endpoint.
class HttpError : public Error {
 public:
  explicit HttpError(const std::string& what) : Error(what) {}
};

}  // namespace dicl
