#pragma once

#include <stdexcept>
#include <string>

namespace avm {

/// Math-domain violations (e.g. division by sin(alpha) with alpha = 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A value falls outside a configured operating envelope.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed or inconsistent rig/scene/profile configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input at a module boundary (bad frame size, bad command argument).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace avm
