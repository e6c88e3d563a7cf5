#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tolerant {

/// Caller violated a documented precondition (bad id, parameter out of domain).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or a broken input promise (e.g. pi_vu != pi_uv^{-1}).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact oracle refused to run because the instance exceeds its size guard.
class GuardError : public std::length_error {
 public:
  GuardError(const std::string& what, double size, double limit)
      : std::length_error(what + " (size " + std::to_string(size) + " exceeds guard " +
                          std::to_string(limit) + ")"),
        size_(size),
        limit_(limit) {}

  double size() const noexcept { return size_; }
  double limit() const noexcept { return limit_; }

 private:
  double size_;
  double limit_;
};

/// The edge sampler ran out of rejection trials.
class SamplerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tolerant
