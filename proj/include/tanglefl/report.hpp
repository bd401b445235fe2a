#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tanglefl/config.hpp"
#include "tanglefl/ledger.hpp"
#include "tanglefl/sim.hpp"

namespace tanglefl {

/// Shortest decimal rendering that parses back to the same double.
std::string format_double(double v);

// CSV emitters. Every file ships a header row; fields are RFC-4180 quoted
// when they would need it (numeric output never does). Identical inputs
// yield identical bytes.
std::string rounds_csv(const std::vector<RoundRecord>& records);
std::string energy_csv(const EnergyLedger& energy);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Cumulative per-round energy and tip-time for the baseline and the
/// event-triggered run side by side.
std::string compare_csv(const EnergyLedger& baseline, const EnergyLedger& triggered);

/// Run summary: resolved config + hash, final metric row, energy component
/// totals and the (expected reference energy, final loss) objective pair.
std::string summary_json(const LoadedConfig& cfg, const SimResult& result);

/// The schema summary_json conforms to; byte-identical to the copy shipped
/// at schemas/summary.schema.json.
const std::string& summary_schema_text();

/// Minimal JSON-Schema subset (type, properties, required, items, enum,
/// additionalProperties). Returns "" when the instance validates, else a
/// human-readable reason.
std::string validate_schema(const std::string& instance_json, const std::string& schema_json);

/// 2x2 metric panels (accuracy, loss, modularity/pureness, energy) as a
/// self-contained SVG.
std::string curves_svg(const std::vector<RoundRecord>& records);

/// One compact JSON object per node: {id, parents, publisher, round}.
std::string ledger_ndjson(const DagLedger& ledger);

/// Ledger round trip: NDJSON structure plus a payload matrix with one row
/// per node, shared float64 format with the dataset export.
void export_ledger(const DagLedger& ledger, const std::filesystem::path& ndjson_path,
                   const std::filesystem::path& payload_path);
DagLedger import_ledger(const std::filesystem::path& ndjson_path,
                        const std::filesystem::path& payload_path);

/// Whole-file write in binary mode; throws IoError on any failure.
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace tanglefl
