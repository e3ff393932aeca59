#pragma once

#include <stdexcept>
#include <string>

namespace lruttl {

// Invalid input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed to meet its tolerance. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : NumericError(what + " (achieved error bound " + std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : NumericError(what + " (best bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "])"),
        lo_(lo),
        hi_(hi) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

}  // namespace lruttl
