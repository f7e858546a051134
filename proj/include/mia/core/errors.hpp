#pragma once

#include <stdexcept>
#include <string>

namespace mia {

// Precondition on an argument's value failed (bad gamma, L = 0, mismatched seeds, ...).
using DomainError = std::domain_error;

// Operation invoked in the wrong object state (sampling an empty buffer, stepping a
// finished episode).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A training loop produced a non-finite loss or return.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible file / message.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mia
