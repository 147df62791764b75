#pragma once

#include <stdexcept>
#include <string>

namespace gasnet {

// Bad input: malformed files, inconsistent topology, violated preconditions
// on user-supplied data. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The integrator produced a non-physical state (NaN, non-positive density,
// unsolvable junction balance) or an iteration failed to converge.
// Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// File system failures. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace gasnet
