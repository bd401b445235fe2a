#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tanglefl/sim.hpp"

namespace tanglefl {

/// A parsed, defaulted and cross-resolved simulation config. `resolved_json`
/// is the canonical sorted-key dump of every experiment-defining field (the
/// `threads` execution knob is excluded: it never changes results);
/// `hash_hex` fingerprints it for reproducibility records.
struct LoadedConfig {
    SimConfig sim;
    std::string resolved_json;
    std::string hash_hex;
};

/// Parses JSON config text. Unknown keys, type mismatches, missing required
/// fields and domain violations throw ConfigError with a message anchored to
/// `source_name` and, where determinable, a line number. `seed_override`
/// replaces the seed before resolution (the --seed flag).
LoadedConfig parse_config(const std::string& text, const std::string& source_name,
                          std::optional<std::uint64_t> seed_override = std::nullopt);

/// Reads and parses a config file; missing/unreadable file throws IoError.
LoadedConfig load_config(const std::string& path,
                         std::optional<std::uint64_t> seed_override = std::nullopt);

/// Recomputes the canonical dump and hash for an already-resolved config
/// (used after programmatic edits such as a variant swap).
LoadedConfig finalize_config(SimConfig sim);

/// Canonical dump used for hashing and the run summary.
std::string config_to_json(const SimConfig& cfg);

const char* variant_name(Variant v);
const char* accounting_name(EnergyAccounting a);

/// FNV-1a 64-bit.
std::uint64_t fnv1a(std::string_view bytes);

} // namespace tanglefl
