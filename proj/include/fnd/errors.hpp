#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fnd {

// Shape disagreement between operands or between input and model config.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid configuration value (learning rate, sigma, ratios, sizes...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Key not present in a keyed store, e.g. a record id missing from a sidecar file.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Input file could not be parsed. `line()` is 1-based; 0 means "not line specific".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Validation or test records reached a training fold.
class LeakageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fnd
