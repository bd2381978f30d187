#pragma once

#include <stdexcept>
#include <string>

namespace resbal {

// Malformed or inconsistent input data (CSV contents, dimensions, labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a usable answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace resbal
