#pragma once

#include <stdexcept>
#include <string>

namespace grw {

/// A collapse or normalization that has no numerically meaningful result,
/// e.g. a collapse center where the post-collapse norm underflows.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// The simulated horizon was too short for a limit statistic to be evaluated.
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grw
