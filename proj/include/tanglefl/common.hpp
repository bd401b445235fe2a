#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tanglefl {

using NodeId = std::uint64_t;
using ClientId = std::uint32_t;

// A ledger node id that does not exist.
struct InvalidReference : std::out_of_range {
    explicit InvalidReference(const std::string& what) : std::out_of_range(what) {}
};

// Vector/matrix dimension mismatch or out-of-range label.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Unusable configuration (file, field, or resolved value).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An arithmetic result stopped being finite.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble: missing, unreadable or unwritable paths.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tanglefl
