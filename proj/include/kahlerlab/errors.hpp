#pragma once

#include <stdexcept>
#include <string>

namespace klab {

/// Bad input: rejected before any computation starts. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver failed to converge. CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-convergence in a regime where an analytic obstruction is plausible
/// (e.g. unequal cone angles). Reported as a suspicion, never as a theorem.
class ObstructionSuspectedError : public SolverError {
 public:
  explicit ObstructionSuspectedError(const std::string& what) : SolverError(what) {}
};

/// An estimator's convergence schedule did not stabilize.
class EstimateUnstableError : public SolverError {
 public:
  explicit EstimateUnstableError(const std::string& what) : SolverError(what) {}
};

}  // namespace klab
