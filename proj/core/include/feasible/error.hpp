#pragma once

#include <stdexcept>
#include <string>

namespace feasible {

// Invalid argument to a generator, metric or operator (n < 1, q outside
// [0, 1), negative noise, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dimension mismatch between a model and the data it is applied to.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A NaN/Inf showed up in a loss, a gradient or a multiplier. `sample_id` is
// the offending sample when one can be named, -1 otherwise.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long sample_id = -1)
      : std::runtime_error(what), sample_id_(sample_id) {}
  long sample_id() const noexcept { return sample_id_; }

 private:
  long sample_id_;
};

// Experiment config problem. `line` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace feasible
