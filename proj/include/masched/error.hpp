#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace masched {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent model / configuration input (CLI exit code 2).
class ModelError : public Error {
 public:
  using Error::Error;
};

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
};

class ParseError : public ModelError {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Deadlocks, bound violations, step-cap overruns found while simulating.
class SimulationError : public Error {
 public:
  using Error::Error;
};

// Two states with one observation disagree on their actions (CLI exit code 4).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Memory caps (Q-table growth) and similar resource exhaustion.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Operations that need a non-empty strategy (CLI exit code 3).
class StrategyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace masched
