#pragma once

#include <stdexcept>
#include <string>

namespace marlaudit {

// Malformed input text. line is 1-based; 0 when the position is unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, const std::string& context = {})
      : std::runtime_error(context + (line ? "line " + std::to_string(line) + ": " + what : what)),
        detail_(what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
};

// Well-formed input that breaks a dataset or manifest invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied parameters (ranges, modes, agent indices).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The estimator cannot produce a value for the given sample.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace marlaudit
