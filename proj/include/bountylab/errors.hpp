#pragma once

#include <stdexcept>

namespace bountylab {

// Invalid configuration values (bad weights, violated type invariants).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called with an argument outside its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A caller broke an operation's precondition, e.g. an illegal MDP action.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The brute-force oracle refuses instances it cannot enumerate.
class InstanceTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace bountylab
