#include "spdcal/report.hpp"

#include "spdcal/dataset.hpp"
#include "spdcal/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace spdcal {

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "table") return ReportFormat::Table;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw ValidationError("unknown report format '" + s + "' (expected table, csv or json)");
}

namespace {

std::string format_percent(double p) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << p;
    return os.str();
}

std::string render_budget_table(const std::vector<BudgetRow>& rows, const Quantity& eta,
                                double k) {
    std::vector<std::array<std::string, 5>> cells;
    cells.push_back({"Coefficient", "Value", "Uncertainty", "Unit", "% Contribution"});
    for (const auto& r : rows) {
        cells.push_back({r.name, format_double(r.value), format_double(r.u * k), r.unit,
                         format_percent(r.percent)});
    }
    cells.push_back({"eta", format_double(eta.value), format_double(eta.u * k),
                     eta.unit.str(), "100.00"});

    std::array<std::size_t, 5> width{};
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < 5; ++c) {
            os << std::left << std::setw(static_cast<int>(width[c])) << cells[i][c];
            os << (c + 1 < 5 ? "  " : "");
        }
        os << '\n';
        if (i == 0) {
            for (std::size_t c = 0; c < 5; ++c) {
                os << std::string(width[c], '-') << (c + 1 < 5 ? "  " : "");
            }
            os << '\n';
        }
    }
    return os.str();
}

std::string render_budget_csv(const std::vector<BudgetRow>& rows, const Quantity& eta,
                              double k) {
    std::ostringstream os;
    os << "coefficient,value,uncertainty,unit,percent_contribution\n";
    for (const auto& r : rows) {
        os << r.name << ',' << format_double(r.value) << ',' << format_double(r.u * k)
           << ',' << r.unit << ',' << format_percent(r.percent) << '\n';
    }
    os << "eta," << format_double(eta.value) << ',' << format_double(eta.u * k) << ','
       << eta.unit.str() << ",100.00\n";
    return os.str();
}

std::string render_budget_json(const std::vector<BudgetRow>& rows, const Quantity& eta,
                               double k) {
    nlohmann::json out;
    out["coverage_factor"] = k;
    out["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        out["rows"].push_back({{"coefficient", r.name},
                               {"value", r.value},
                               {"u", r.u * k},
                               {"unit", r.unit},
                               {"percent_contribution", r.percent}});
    }
    out["eta"] = {{"value", eta.value},
                  {"u", eta.u * k},
                  {"unit", eta.unit.str()},
                  {"coverage_factor", k}};
    return out.dump(2) + "\n";
}

} // namespace

std::string render_budget(const std::vector<BudgetRow>& rows, const Quantity& eta,
                          double coverage_factor, ReportFormat format) {
    if (rows.empty()) throw ValidationError("budget report requires at least one row");
    if (!(coverage_factor > 0.0)) throw ValidationError("coverage factor must be positive");
    switch (format) {
        case ReportFormat::Table: return render_budget_table(rows, eta, coverage_factor);
        case ReportFormat::Csv: return render_budget_csv(rows, eta, coverage_factor);
        case ReportFormat::Json: return render_budget_json(rows, eta, coverage_factor);
    }
    throw ValidationError("unhandled report format");
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string() + " for digest");
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

nlohmann::json provenance_json(const std::vector<std::filesystem::path>& inputs,
                               std::uint64_t seed) {
    nlohmann::json prov;
    prov["tool"] = std::string(kToolName) + " " + kToolVersion;
    prov["seed"] = seed;
    prov["inputs"] = nlohmann::json::array();
    for (const auto& p : inputs) {
        prov["inputs"].push_back(
            {{"path", p.filename().string()}, {"fnv1a64", file_digest(p)}});
    }
    return prov;
}

} // namespace spdcal
