#pragma once

#include <stdexcept>
#include <string>

namespace mrflearn {

// Malformed input: shape mismatch, invalid parameters, corrupt files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured size cap (state count, dictionary size, feature count) was hit.
class SizeCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A numerical validation failed (detailed balance, convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mrflearn
