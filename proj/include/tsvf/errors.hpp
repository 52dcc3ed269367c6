#pragma once

#include <stdexcept>
#include <string>

namespace tsvf {

// Violation of a structural precondition: mismatched spaces, absent factors,
// unknown modes or detectors. These indicate caller bugs, not physics.
struct StructureError : std::invalid_argument {
    explicit StructureError(const std::string& what) : std::invalid_argument(what) {}
};

// Bad user-facing configuration: malformed files, unknown scenario ids,
// out-of-range parameters.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tsvf
