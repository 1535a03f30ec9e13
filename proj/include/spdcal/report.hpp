#pragma once

#include "spdcal/measurement.hpp"
#include "spdcal/quantity.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace spdcal {

inline constexpr const char* kToolName = "spdcal";
inline constexpr const char* kToolVersion = "1.0.0";

enum class ReportFormat { Table, Csv, Json };

/// Accepts "table", "csv" or "json"; throws ValidationError otherwise.
ReportFormat report_format_from_string(const std::string& s);

/// Uncertainty-budget rendering. Rows appear in the order given; a final
/// combined-efficiency row is appended. Reported uncertainties are scaled
/// by the coverage factor; stored/underlying values are not touched. All
/// formats are byte-stable for identical input.
std::string render_budget(const std::vector<BudgetRow>& rows, const Quantity& eta,
                          double coverage_factor, ReportFormat format);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Provenance block attached to every report: input digests, seed, tool
/// version. Deliberately contains no timestamps so artifacts stay
/// byte-identical across runs.
nlohmann::json provenance_json(const std::vector<std::filesystem::path>& inputs,
                               std::uint64_t seed);

} // namespace spdcal
