#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mlab {

/// Argument outside the domain an operation accepts (hi <= lo, x < 1, ...).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A caller-supplied precondition does not hold (e.g. missing sieving primes).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameter outside a mathematical domain, such as lambda outside (0, 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The request exceeds what the built tables cover.  Carries the largest
/// usable value so callers can report it.
class CapabilityError : public std::runtime_error {
 public:
  CapabilityError(const std::string& what, double max_usable)
      : std::runtime_error(what), max_usable_(max_usable) {}
  double max_usable() const noexcept { return max_usable_; }

 private:
  double max_usable_;
};

/// Two independent computations of the same quantity disagree.
class CrossCheckError : public std::runtime_error {
 public:
  CrossCheckError(const std::string& what, std::uint64_t worst_n, double discrepancy)
      : std::runtime_error(what), worst_n_(worst_n), discrepancy_(discrepancy) {}
  std::uint64_t worst_n() const noexcept { return worst_n_; }
  double discrepancy() const noexcept { return discrepancy_; }

 private:
  std::uint64_t worst_n_;
  double discrepancy_;
};

}  // namespace mlab
