#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabsa {

// Process exit codes used by the CLI. Library code throws; main() maps.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitNumericalDivergence = 3,
  kExitUndefinedMetric = 4,
};

// Bad user input: unreadable files, shape mismatches, violated preconditions.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite loss during refinement. Carries the iteration that blew up.
class NumericalDivergenceError : public std::runtime_error {
 public:
  NumericalDivergenceError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Aspect objective ran past the configured floor (repulsion term dominates).
class UnboundedObjectiveError : public NumericalDivergenceError {
 public:
  UnboundedObjectiveError(const std::string& what, std::size_t iteration)
      : NumericalDivergenceError(what, iteration) {}
};

// Metric has no defined value (e.g. AUC with a single class present).
class UndefinedMetricError : public std::runtime_error {
 public:
  explicit UndefinedMetricError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tabsa
