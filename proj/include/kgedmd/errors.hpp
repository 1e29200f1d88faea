#pragma once

#include <stdexcept>
#include <string>

namespace kgedmd {

/// Wrong dimensions or out-of-domain arguments.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent configuration (empty data, degenerate inputs, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Euler-Maruyama path left the finite region.
class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(const std::string& what, std::size_t trajectory, std::size_t step)
      : std::runtime_error(what), trajectory_(trajectory), step_(step) {}
  std::size_t trajectory() const noexcept { return trajectory_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t trajectory_;
  std::size_t step_;
};

/// Surrogate coefficient vector blew up during time integration.
class PropagationDiverged : public std::runtime_error {
 public:
  PropagationDiverged(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OptimizationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kgedmd
