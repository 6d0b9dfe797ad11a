#pragma once

#include <stdexcept>
#include <string>

namespace sieve {

// Non-positive lengths, negative durations and similar argument faults.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed profiles, parameter files, timing allocations or scripts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeviceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sieve
