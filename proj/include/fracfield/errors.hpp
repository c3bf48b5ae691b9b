#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracfield {

/// Bad user input: out-of-range parameters, malformed configs, violated
/// preconditions. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base of every numerical failure (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : NumericalError(what + " (achieved error estimate " +
                       std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

class NotPsd : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MaxIterExceeded : public NumericalError {
 public:
  MaxIterExceeded(const std::string& what, double last_increment)
      : NumericalError(what), last_increment_(last_increment) {}

  double last_increment() const noexcept { return last_increment_; }

 private:
  double last_increment_;
};

}  // namespace fracfield
