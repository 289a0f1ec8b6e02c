#pragma once

#include <stdexcept>
#include <string>

namespace mpe {

/// Input that violates a model constraint (bad probabilities, shape mismatch,
/// out-of-range index). The message names the first violated constraint.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exhaustive routine was asked to enumerate more than its guard allows.
class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& what) { throw InvalidInput(what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(what);
}

}  // namespace detail
}  // namespace mpe
