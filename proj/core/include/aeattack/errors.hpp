#pragma once

#include <stdexcept>
#include <string>

namespace aeattack {

// Malformed layer stacks, shape mismatches, invalid experiment settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range labels, non-normalized probability vectors and similar caller mistakes.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An input the operation cannot be defined on (e.g. normalizing an all-zero vector).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// NaN/Inf during training or any other numeric breakdown.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aeattack
