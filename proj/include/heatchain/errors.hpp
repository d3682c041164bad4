#pragma once

#include <stdexcept>
#include <string>

namespace heatchain {

// Invalid argument to a model or analysis function (negative energy,
// p outside (0,1), non-positive temperature, length mismatch, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// All clocks have rate zero; the jump process cannot advance.
class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A statistical routine could not produce a result (degenerate samples,
// non-bracketing root, non-converged quadrature, too few bins).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment configuration failed schema validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An observer threw while consuming the event stream.
class ObserverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace heatchain
