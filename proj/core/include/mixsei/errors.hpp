#pragma once

#include <stdexcept>
#include <string>

namespace mixsei {

// Invalid or inconsistent configuration values (bad field, unparseable file).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// File-level problems: missing files, short reads, bad magic, checksum failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Dimension or compatibility mismatches between two artifacts
// (e.g. dataset K vs. model K).
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixsei
