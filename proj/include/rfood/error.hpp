// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace rfood {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed binary or JSON input. The message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Shapes of two operands disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Data protocol violation, e.g. OOD records outside the test split.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace rfood
