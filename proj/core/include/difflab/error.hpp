#pragma once

#include <stdexcept>
#include <string>

namespace difflab {

// Input outside the admissible parameter range (delta, epsilon, widths, ...).
class RangeError : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

// Structurally invalid input: mismatched grids, empty regions, bad matrices.
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// An iterative method failed to reach its tolerance.
class SolverError : public std::runtime_error
{
public:
  SolverError(const std::string &what, double residual)
    : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
      residual_(residual)
  {
  }

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

// Scenario files: parse or validation failure, carries the offending line (0 if unknown).
class ConfigError : public std::runtime_error
{
public:
  ConfigError(const std::string &what, int line = 0)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line)
  {
  }

  int line() const noexcept { return line_; }

private:
  int line_;
};

}  // namespace difflab
