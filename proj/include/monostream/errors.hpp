#pragma once

#include <stdexcept>
#include <string>

namespace monostream {

// Error classes surfaced by the library. The CLI maps each to its own exit code.

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

class MalformedInputError : public std::runtime_error {
 public:
  explicit MalformedInputError(const std::string& what) : std::runtime_error(what) {}
};

class MissingLinkError : public std::runtime_error {
 public:
  explicit MissingLinkError(const std::string& what) : std::runtime_error(what) {}
};

class OutOfDomainError : public std::out_of_range {
 public:
  explicit OutOfDomainError(const std::string& what) : std::out_of_range(what) {}
};

}  // namespace monostream
