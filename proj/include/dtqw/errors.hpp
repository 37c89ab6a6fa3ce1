#pragma once

#include <stdexcept>
#include <string>

namespace dtqw {

/// Scenario file rejected (unknown key, bad value, unreadable). Exit code 1.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Mid-run numerical invariant violation (norm/trace drift). Exit code 2.
class InvariantViolation : public std::runtime_error {
  public:
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Winding number requested across a closed (or unresolved) gap.
class GapClosedError : public std::runtime_error {
  public:
    explicit GapClosedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dtqw
