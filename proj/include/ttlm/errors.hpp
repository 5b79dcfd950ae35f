#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttlm {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes. Message names both shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid model/adapter hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API misuse: bad argument combinations, out-of-order calls, unknown ids.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Bad payload content: unknown token ids, labels outside the label set.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Message names the offending line where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Filesystem / wire failures. Message names the path or endpoint.
class IoError : public Error {
 public:
  using Error::Error;
};

std::string shape_str(const std::vector<std::int64_t>& shape);

}  // namespace ttlm
