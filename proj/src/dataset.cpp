#include "spdcal/dataset.hpp"

#include "spdcal/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace spdcal {

namespace {

constexpr const char* kDatasetMagic = "# spdcal-dataset v1";
constexpr const char* kScanMagic = "# spdcal-scanmap v1";
constexpr const char* kRunHeader =
    "run_id,kind,value,monitor_power_W,duration_s,wavelength_nm,attenuator_setting";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, int line_no, const std::string& col) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ValidationError("line " + std::to_string(line_no) + ": bad number in column '" +
                              col + "': '" + s + "'");
    }
    return v;
}

long long parse_ll(const std::string& s, int line_no, const std::string& col) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": bad integer in column '" +
                              col + "': '" + s + "'");
    }
    return v;
}

/// Shortest scientific representation, e.g. "8.50711e-07".
std::string format_double_sci(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    return std::string(buf, ptr);
}

/// Shift the decimal exponent of a numeric literal textually; exact, no
/// floating arithmetic, so unit rescaling on write/load is lossless.
std::string shift_exponent(const std::string& literal, int delta) {
    auto e = literal.find_first_of("eE");
    if (e == std::string::npos) return literal + "e" + std::to_string(delta);
    int exp = 0;
    try {
        exp = std::stoi(literal.substr(e + 1));
    } catch (const std::exception&) {
        throw ValidationError("bad exponent in numeric literal: " + literal);
    }
    return literal.substr(0, e) + "e" + std::to_string(exp + delta);
}

struct HeaderBlock {
    nlohmann::json meta;
    int first_data_line = 0;  // 1-based line number of the column header
};

HeaderBlock read_header(std::istream& is, const char* magic, const std::string& origin) {
    std::string line;
    int line_no = 0;
    if (!std::getline(is, line) || line != magic) {
        throw ValidationError(origin + ": not a recognized file (missing '" +
                              std::string(magic) + "' header)");
    }
    ++line_no;
    std::string json_text;
    while (is.peek() == '#') {
        std::getline(is, line);
        ++line_no;
        json_text += line.size() > 2 ? line.substr(2) : "";
    }
    HeaderBlock hb;
    try {
        hb.meta = json_text.empty() ? nlohmann::json::object()
                                    : nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(origin + ": bad metadata JSON: " + e.what());
    }
    hb.first_data_line = line_no + 1;
    return hb;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void Dataset::validate() const {
    if (meta.schema_version != 1) {
        throw ValidationError("unsupported schema version " +
                              std::to_string(meta.schema_version));
    }
    if (meta.group_stride <= 0) throw ValidationError("group stride must be > 0");
    std::unordered_set<long long> ids;
    for (const auto& r : runs) {
        if (!ids.insert(r.run_id).second) {
            throw ValidationError("duplicate run_id " + std::to_string(r.run_id));
        }
        r.validate();
    }
}

std::string dataset_to_string(const Dataset& ds) {
    nlohmann::json meta{
        {"schema_version", ds.meta.schema_version},
        {"scenario", ds.meta.scenario},
        {"group_stride", ds.meta.group_stride},
        {"seed", ds.meta.seed},
        {"generator", ds.meta.generator},
        {"constants", ds.meta.constants},
    };
    if (ds.meta.truth) meta["truth"] = *ds.meta.truth;

    std::ostringstream os;
    os << kDatasetMagic << "\n# " << meta.dump() << "\n" << kRunHeader << "\n";
    for (const auto& r : ds.runs) {
        os << r.run_id << ',' << to_string(r.kind) << ',' << format_double(r.value) << ','
           << format_double(r.monitor_power_w) << ',' << format_double(r.duration_s) << ','
           << shift_exponent(format_double_sci(r.wavelength_m), 9) << ','
           << to_string(r.setting) << "\n";
    }
    return os.str();
}

Dataset dataset_from_string(const std::string& text, const std::string& origin) {
    std::istringstream is(text);
    const HeaderBlock hb = read_header(is, kDatasetMagic, origin);

    Dataset ds;
    ds.meta.schema_version = hb.meta.value("schema_version", 0);
    ds.meta.scenario = hb.meta.value("scenario", "");
    ds.meta.group_stride = hb.meta.value("group_stride", 10000LL);
    ds.meta.seed = hb.meta.value("seed", 0ULL);
    ds.meta.generator = hb.meta.value("generator", "");
    if (hb.meta.contains("constants")) ds.meta.constants = hb.meta["constants"];
    if (hb.meta.contains("truth")) ds.meta.truth = hb.meta["truth"];

    std::string line;
    int line_no = hb.first_data_line - 1;
    if (!std::getline(is, line) || line != kRunHeader) {
        throw ValidationError(origin + ": missing run-table header at line " +
                              std::to_string(line_no + 1));
    }
    ++line_no;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 7) {
            throw ValidationError(origin + ": line " + std::to_string(line_no) +
                                  ": expected 7 columns, got " + std::to_string(cols.size()));
        }
        RunRecord r;
        r.run_id = parse_ll(cols[0], line_no, "run_id");
        try {
            r.kind = run_kind_from_string(cols[1]);
            r.setting = attenuator_from_string(cols[6]);
        } catch (const ValidationError& e) {
            throw ValidationError(origin + ": line " + std::to_string(line_no) + ": " +
                                  e.what());
        }
        r.value = parse_double(cols[2], line_no, "value");
        r.monitor_power_w = parse_double(cols[3], line_no, "monitor_power_W");
        r.duration_s = parse_double(cols[4], line_no, "duration_s");
        // exact textual exponent shift back to meters; the nm literal is
        // never materialized as a double, so the roundtrip is lossless
        parse_double(cols[5], line_no, "wavelength_nm");  // validates the raw token
        r.wavelength_m = parse_double(shift_exponent(cols[5], -9), line_no,
                                      "wavelength_nm");
        ds.runs.push_back(r);
    }
    ds.validate();
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open dataset file: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return dataset_from_string(buf.str(), path.string());
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write dataset file: " + path.string());
    f << dataset_to_string(ds);
}

std::string scan_map_to_string(const ScanMap& map) {
    nlohmann::json meta{
        {"schema_version", 1},
        {"nx", map.nx},
        {"ny", map.ny},
        {"step_m", map.step_m},
        {"origin_x_m", map.origin_x_m},
        {"origin_y_m", map.origin_y_m},
    };
    if (map.truth) meta["truth"] = *map.truth;
    std::ostringstream os;
    os << kScanMagic << "\n# " << meta.dump() << "\nx_m,y_m,counts\n";
    for (int iy = 0; iy < map.ny; ++iy) {
        for (int ix = 0; ix < map.nx; ++ix) {
            os << format_double(map.x_of(ix)) << ',' << format_double(map.y_of(iy)) << ','
               << format_double(map.at(ix, iy)) << "\n";
        }
    }
    return os.str();
}

void save_scan_map(const ScanMap& map, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write scan map: " + path.string());
    f << scan_map_to_string(map);
}

ScanMap load_scan_map(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open scan map: " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    std::istringstream is(buf.str());
    const HeaderBlock hb = read_header(is, kScanMagic, path.string());

    ScanMap map;
    map.nx = hb.meta.value("nx", 0);
    map.ny = hb.meta.value("ny", 0);
    map.step_m = hb.meta.value("step_m", 0.0);
    map.origin_x_m = hb.meta.value("origin_x_m", 0.0);
    map.origin_y_m = hb.meta.value("origin_y_m", 0.0);
    if (hb.meta.contains("truth")) map.truth = hb.meta["truth"];
    if (map.nx <= 0 || map.ny <= 0 || !(map.step_m > 0.0)) {
        throw ValidationError(path.string() + ": bad scan-map geometry");
    }
    map.counts.assign(static_cast<std::size_t>(map.nx) * map.ny, 0.0);

    std::string line;
    int line_no = hb.first_data_line - 1;
    if (!std::getline(is, line) || line != "x_m,y_m,counts") {
        throw ValidationError(path.string() + ": missing scan-map column header");
    }
    ++line_no;
    std::size_t idx = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 3) {
            throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                                  ": expected 3 columns");
        }
        if (idx >= map.counts.size()) {
            throw ValidationError(path.string() + ": more pixels than nx*ny");
        }
        map.counts[idx++] = parse_double(cols[2], line_no, "counts");
    }
    if (idx != map.counts.size()) {
        throw ValidationError(path.string() + ": pixel count does not match nx*ny");
    }
    return map;
}

} // namespace spdcal
