#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rampopt {

// Base for all recoverable errors. category() is a stable lowercase token;
// the CLI maps each category onto its own exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

// A parameter or control input lies outside its configured box.
struct BoundsError : Error {
  explicit BoundsError(const std::string& w) : Error("bounds", w) {}
};

// An argument violates a mathematical precondition (non-positive frequency,
// mismatched ramp kinds, degenerate box, ...).
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};

// Currents that cannot hold a cloud (quadrupole below its minimum, or a
// non-positive bias field).
struct UntrappableError : Error {
  explicit UntrappableError(const std::string& w) : Error("untrappable", w) {}
};

// A pulse train extends outside the simulated trajectory window.
struct CoverageError : Error {
  explicit CoverageError(const std::string& w) : Error("coverage", w) {}
};

// Integration blow-up or a kernel matrix that stays non-positive-definite
// after the full jitter ladder.
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error("numerical", w) {}
};

// Malformed or inconsistent run configuration.
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};

// Filesystem failures (missing run directory, unwritable output, ...).
struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w) {}
};

// A replayed run diverged from its log.
struct ReplayMismatchError : Error {
  explicit ReplayMismatchError(const std::string& w) : Error("replay-mismatch", w) {}
};

// An operation needs more data than the caller supplied (empty record set,
// too few observations to fit a surrogate, ...).
struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& w) : Error("insufficient-data", w) {}
};

}  // namespace rampopt
