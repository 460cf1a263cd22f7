#pragma once

#include <stdexcept>
#include <string>

namespace mars {

// Invalid configuration or violated config invariant. Messages name the
// offending field so they can be surfaced verbatim by the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// File-level failure (missing trace, unwritable output directory, ...).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal simulation failure (stuck pipeline, broken invariant).
class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mars
