#pragma once

#include <stdexcept>
#include <string>

namespace hsrirs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration document could not be parsed or a key has the wrong type.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A parsed configuration violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an interface contract (dimension mismatch, undefined quantity).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The instance has no feasible point (e.g. every band has zero capacity).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Too many cells of an experiment failed for its aggregates to mean anything.
class ExperimentError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsrirs
