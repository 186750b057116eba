#pragma once

#include <stdexcept>
#include <string>

namespace pinning {

/// Parameters outside the region where a formula or bound is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A disorder description that cannot be used (bad table, nonzero mean, ...).
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sizes that do not fit together (disorder too short, odd length, cap exceeded).
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// The excursion-law truncation horizon is too small for the requested accuracy.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, long required_trunc)
      : std::runtime_error(what), required_trunc_(required_trunc) {}
  long required_trunc() const noexcept { return required_trunc_; }

 private:
  long required_trunc_;
};

}  // namespace pinning
