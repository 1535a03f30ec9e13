#pragma once

#include "spdcal/measurement.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spdcal {

/// Dataset header: schema version, scenario tag, instrument constants and
/// (for simulated data) the generating truth block.
struct DatasetMeta {
    int schema_version = 1;
    std::string scenario;  // "tau", "flux-sweep", "wavelength-sweep"
    long long group_stride = 10000;  // run_id = group * stride + sequence
    std::uint64_t seed = 0;
    std::string generator;  // tool id, no timestamps (outputs stay byte-stable)
    nlohmann::json constants = nlohmann::json::object();
    std::optional<nlohmann::json> truth;  // simulator sidecar
};

struct Dataset {
    DatasetMeta meta;
    std::vector<RunRecord> runs;

    long long group_of(const RunRecord& r) const { return r.run_id / meta.group_stride; }

    /// Throws ValidationError on duplicate run ids or field violations.
    void validate() const;
};

/// Parse and validate a dataset file ('#'-prefixed JSON header followed
/// by a CSV run table). Errors carry the offending line number.
Dataset load_dataset(const std::filesystem::path& path);

/// Inverse of load_dataset; doubles are serialized losslessly so the
/// roundtrip is the identity on every field.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

std::string dataset_to_string(const Dataset& ds);
Dataset dataset_from_string(const std::string& text, const std::string& origin = "<string>");

/// 2D count map from an active-area scan.
struct ScanMap {
    int nx = 0, ny = 0;
    double step_m = 0.0;
    double origin_x_m = 0.0, origin_y_m = 0.0;  // coordinates of pixel (0,0)
    std::vector<double> counts;                 // row-major, y outer
    std::optional<nlohmann::json> truth;

    double at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * nx + ix]; }
    double x_of(int ix) const { return origin_x_m + ix * step_m; }
    double y_of(int iy) const { return origin_y_m + iy * step_m; }
};

ScanMap load_scan_map(const std::filesystem::path& path);
void save_scan_map(const ScanMap& map, const std::filesystem::path& path);
std::string scan_map_to_string(const ScanMap& map);

/// Lossless shortest-roundtrip formatting used by all writers.
std::string format_double(double v);

} // namespace spdcal
