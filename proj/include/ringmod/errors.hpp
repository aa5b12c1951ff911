#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ringmod {

/// Caller supplied arguments that violate an operation's preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the domain of a map (e.g. |x| >= 1 for the ball maps).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical identity or postcondition failed to hold.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation refuses to run because a required hypothesis is unmet.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver or adaptive refinement did not converge.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::string dump = {})
      : std::runtime_error(what), dump_(std::move(dump)) {}

  const std::string& dump() const noexcept { return dump_; }

 private:
  std::string dump_;
};

}  // namespace ringmod
