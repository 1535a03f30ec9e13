// Command-line front end: simulate datasets, run the analysis pipelines
// and render reports.

#include "spdcal/analysis.hpp"
#include "spdcal/dataset.hpp"
#include "spdcal/errors.hpp"
#include "spdcal/report.hpp"
#include "spdcal/scan.hpp"
#include "spdcal/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spdcal;

namespace {

struct CommonOpts {
    std::string input;
    std::string output;
    std::string config_path;
    std::string format = "table";
    double coverage_factor = 1.0;
    std::uint64_t seed = 1;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config " + path + " must be a JSON object");
    return j;
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << text;
}

/// Simple aligned-columns renderer shared by the "table" outputs.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        if (width.size() < row.size()) width.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            os << std::left << std::setw(static_cast<int>(width[c])) << rows[i][c];
            if (c + 1 < rows[i].size()) os << "  ";
        }
        os << '\n';
        if (i == 0) {
            for (std::size_t c = 0; c < rows[0].size(); ++c) {
                os << std::string(width[c], '-');
                if (c + 1 < rows[0].size()) os << "  ";
            }
            os << '\n';
        }
    }
    return os.str();
}

std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            os << row[c];
            if (c + 1 < row.size()) os << ',';
        }
        os << '\n';
    }
    return os.str();
}

std::string render_rows(const std::vector<std::vector<std::string>>& rows,
                        ReportFormat fmt) {
    return fmt == ReportFormat::Csv ? render_csv(rows) : render_table(rows);
}

// ---------------------------------------------------------------- simulator

sim::Config simulator_config(const json& cfg) {
    sim::Config c;
    const json s = cfg.value("simulator", json::object());
    if (s.contains("source")) {
        const json& j = s["source"];
        c.source.mean_power_w = j.value("mean_power_w", c.source.mean_power_w);
        c.source.relative_drift_sd = j.value("relative_drift_sd", c.source.relative_drift_sd);
        c.source.wavelength_m = j.value("wavelength_m", c.source.wavelength_m);
    }
    if (s.contains("detector")) {
        const json& j = s["detector"];
        c.detector.eta_true = j.value("eta_true", c.detector.eta_true);
        c.detector.dead_time_s = j.value("dead_time_s", c.detector.dead_time_s);
        c.detector.dark_rate_hz = j.value("dark_rate_hz", c.detector.dark_rate_hz);
        c.detector.active_area_diameter_m =
            j.value("active_area_diameter_m", c.detector.active_area_diameter_m);
        c.detector.beam_waist_m = j.value("beam_waist_m", c.detector.beam_waist_m);
        if (j.contains("window")) {
            const json& w = j["window"];
            c.detector.window.n = w.value("n", c.detector.window.n);
            c.detector.window.n_a = w.value("n_air", c.detector.window.n_a);
            c.detector.window.thickness_m =
                w.value("thickness_m", c.detector.window.thickness_m);
            c.detector.window.visibility =
                w.value("visibility", c.detector.window.visibility);
        }
        if (j.contains("area_dips")) {
            c.detector.area_dips.clear();
            for (const auto& d : j["area_dips"]) {
                c.detector.area_dips.push_back({d.value("x_m", 0.0), d.value("y_m", 0.0),
                                                d.value("sigma_m", 12e-6),
                                                d.value("depth", 0.5)});
            }
        }
    }
    if (s.contains("photodiode")) {
        const json& j = s["photodiode"];
        c.photodiode.responsivity_a_per_w =
            j.value("responsivity_a_per_w", c.photodiode.responsivity_a_per_w);
        c.photodiode.dark_current_a = j.value("dark_current_a", c.photodiode.dark_current_a);
        c.photodiode.relative_noise_sd =
            j.value("relative_noise_sd", c.photodiode.relative_noise_sd);
    }
    if (s.contains("attenuators")) {
        const json& j = s["attenuators"];
        c.attenuators.tau30_true = j.value("tau30_true", c.attenuators.tau30_true);
        c.attenuators.tau40_true = j.value("tau40_true", c.attenuators.tau40_true);
        c.attenuators.day_to_day_relative_sd =
            j.value("day_to_day_relative_sd", c.attenuators.day_to_day_relative_sd);
    }
    c.cal_factor_c = s.value("cal_factor_c", c.cal_factor_c);
    c.lens_transmissivity = s.value("lens_transmissivity", c.lens_transmissivity);
    c.acquisition_time_s = s.value("acquisition_time_s", c.acquisition_time_s);
    c.eps_true = s.value("eps_true", c.eps_true);
    c.runs_per_point = s.value("runs_per_point", c.runs_per_point);
    c.counting_noise = s.value("counting_noise", c.counting_noise);
    if (s.value("noiseless", false)) c = c.noiseless();
    return c;
}

int cmd_simulate(const CommonOpts& opt, const std::string& scenario) {
    const json cfg = load_config(opt.config_path);
    sim::Config sc = simulator_config(cfg);
    const json sj = cfg.value("scenario", json::object());

    std::string out_path = opt.output;
    auto resolve = [&](const char* def) {
        if (out_path.empty()) {
            out_path = def;
        } else if (fs::is_directory(out_path) || out_path.back() == '/') {
            out_path = (fs::path(out_path) / def).string();
        }
    };

    if (scenario == "tau") {
        const json j = sj.value("tau", json::object());
        Dataset ds = sim::simulate_tau_run(sc, j.value("n_samples", 100),
                                           j.value("n_days", 10), opt.seed);
        resolve("tau.csv");
        save_dataset(ds, out_path);
    } else if (scenario == "flux-sweep") {
        std::vector<double> rates;
        const json j = sj.value("flux_sweep", json::object());
        if (j.contains("target_rates_hz")) {
            rates = j["target_rates_hz"].get<std::vector<double>>();
        } else {
            // default: 10 points, log-spaced over 5e3 .. 2e6 counts/s
            const int n = 10;
            for (int i = 0; i < n; ++i) {
                rates.push_back(5e3 * std::pow(2e6 / 5e3, i / double(n - 1)));
            }
        }
        Dataset ds = sim::simulate_flux_sweep(sc, rates, opt.seed);
        resolve("fluxsweep.csv");
        save_dataset(ds, out_path);
    } else if (scenario == "wavelength-sweep") {
        const json j = sj.value("wavelength_sweep", json::object());
        std::vector<double> lambdas;
        if (j.contains("lambdas_m")) {
            lambdas = j["lambdas_m"].get<std::vector<double>>();
        } else {
            const double lo = j.value("lambda_min_m", sc.source.wavelength_m - 1.5e-9);
            const double hi = j.value("lambda_max_m", sc.source.wavelength_m + 1.5e-9);
            const int n = j.value("n_points", 61);
            for (int i = 0; i < n; ++i) {
                lambdas.push_back(lo + (hi - lo) * i / double(n - 1));
            }
        }
        Dataset ds = sim::simulate_wavelength_sweep(
            sc, lambdas, j.value("target_counts", 1e5), opt.seed);
        resolve("wavesweep.csv");
        save_dataset(ds, out_path);
    } else if (scenario == "area-scan") {
        const json j = sj.value("area_scan", json::object());
        if (j.value("default_dips", true) && sc.detector.area_dips.empty()) {
            sc.detector.area_dips = sim::default_area_dips();
        }
        sim::ScanGrid grid;
        grid.half_extent_m = j.value("half_extent_m", grid.half_extent_m);
        grid.step_m = j.value("step_m", grid.step_m);
        ScanMap map = sim::simulate_area_scan(sc, grid, opt.seed);
        resolve("scan.csv");
        save_scan_map(map, out_path);
    } else {
        throw ValidationError("unknown scenario '" + scenario + "'");
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

// ----------------------------------------------------------------- analyses

AnalysisConstants constants_for(const Dataset& ds, const json& cfg) {
    return constants_from_json(ds.meta.constants, cfg.value("constants", json::object()));
}

json quantity_report(const Quantity& q, double k) { return quantity_to_json(q, k); }

int cmd_tau(const CommonOpts& opt) {
    const Dataset ds = load_dataset(opt.input);
    const TauAnalysis ta = analyze_tau(ds);
    const ReportFormat fmt = report_format_from_string(opt.format);
    const double k = opt.coverage_factor;

    if (fmt == ReportFormat::Json) {
        json out;
        out["tau"] = quantity_report(ta.tau, k);
        out["day_scatter_sd"] = ta.day_scatter_sd;
        out["mean_measurement_u"] = ta.mean_measurement_u;
        out["days"] = json::array();
        for (const auto& d : ta.days) {
            out["days"].push_back({{"day", d.day},
                                   {"tau", quantity_report(d.est.tau, k)},
                                   {"tau30", quantity_report(d.est.tau_30, k)},
                                   {"tau40", quantity_report(d.est.tau_40, k)}});
        }
        out["provenance"] = provenance_json({opt.input}, ds.meta.seed);
        write_output(out.dump(2) + "\n", opt.output);
        return 0;
    }

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"day", "tau", "u(tau)", "tau30", "tau40"});
    for (const auto& d : ta.days) {
        rows.push_back({std::to_string(d.day), format_double(d.est.tau.value),
                        format_double(d.est.tau.u * k), format_double(d.est.tau_30.value),
                        format_double(d.est.tau_40.value)});
    }
    std::ostringstream os;
    os << render_rows(rows, fmt);
    os << "# tau = " << format_double(ta.tau.value) << " +/- "
       << format_double(ta.tau.u * k) << " (K=" << format_double(k) << ")\n"
       << "# day scatter sd = " << format_double(ta.day_scatter_sd) << "\n"
       << "# mean per-day measurement u = " << format_double(ta.mean_measurement_u)
       << "\n";
    write_output(os.str(), opt.output);
    return 0;
}

std::vector<std::vector<std::string>> efficiency_rows(const EfficiencyAnalysis& ea,
                                                      double k) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"group", "lambda_m", "rate_hz", "eta", "u_stat", "u_combined",
                    "eps", "flagged"});
    for (const auto& p : ea.points) {
        rows.push_back({std::to_string(p.group), format_double(p.lambda_m),
                        format_double(p.point.rate), format_double(p.point.eta.value),
                        format_double(p.u_stat * k), format_double(p.point.eta.u * k),
                        format_double(p.eps.value), p.point.flagged ? "yes" : "no"});
    }
    return rows;
}

json efficiency_json(const EfficiencyAnalysis& ea, double k) {
    json pts = json::array();
    for (const auto& p : ea.points) {
        pts.push_back({{"group", p.group},
                       {"lambda_m", p.lambda_m},
                       {"rate_hz", p.point.rate},
                       {"eta", quantity_report(p.point.eta, k)},
                       {"u_stat", p.u_stat * k},
                       {"sys_rel", p.sys_rel},
                       {"eps", quantity_report(p.eps, k)},
                       {"flagged", p.point.flagged}});
    }
    return pts;
}

int cmd_efficiency(const CommonOpts& opt) {
    const json cfg = load_config(opt.config_path);
    const Dataset ds = load_dataset(opt.input);
    const EfficiencyAnalysis ea = analyze_efficiency(ds, constants_for(ds, cfg));
    const ReportFormat fmt = report_format_from_string(opt.format);
    const double k = opt.coverage_factor;

    if (fmt == ReportFormat::Json) {
        json out;
        out["points"] = efficiency_json(ea, k);
        out["coverage_factor"] = k;
        out["provenance"] = provenance_json({opt.input}, ds.meta.seed);
        write_output(out.dump(2) + "\n", opt.output);
    } else {
        write_output(render_rows(efficiency_rows(ea, k), fmt), opt.output);
    }
    return 0;
}

int cmd_zero_flux(const CommonOpts& opt) {
    const json cfg = load_config(opt.config_path);
    const Dataset ds = load_dataset(opt.input);
    const ZeroFluxAnalysis za = analyze_zero_flux(ds, constants_for(ds, cfg));
    const ReportFormat fmt = report_format_from_string(opt.format);
    const double k = opt.coverage_factor;

    if (fmt == ReportFormat::Json) {
        json out;
        out["eta0"] = quantity_report(za.fit.eta0, k);
        out["dead_time_s"] = quantity_report(za.fit.dead_time, k);
        out["covariance"] = {{za.fit.covariance[0][0], za.fit.covariance[0][1]},
                             {za.fit.covariance[1][0], za.fit.covariance[1][1]}};
        out["chi2"] = za.fit.chi2;
        out["dof"] = za.fit.dof;
        out["flagged_negative_dead_time"] = za.fit.flagged_negative_dead_time;
        out["points"] = efficiency_json(za.efficiency, k);
        out["coverage_factor"] = k;
        out["provenance"] = provenance_json({opt.input}, ds.meta.seed);
        write_output(out.dump(2) + "\n", opt.output);
        return 0;
    }

    std::ostringstream os;
    os << render_rows(efficiency_rows(za.efficiency, k), fmt);
    os << "# eta0 = " << format_double(za.fit.eta0.value) << " +/- "
       << format_double(za.fit.eta0.u * k) << " (K=" << format_double(k) << ")\n"
       << "# dead time = " << format_double(za.fit.dead_time.value) << " +/- "
       << format_double(za.fit.dead_time.u * k) << " s\n"
       << "# chi2/dof = " << format_double(za.fit.chi2) << "/" << za.fit.dof << "\n";
    if (za.fit.flagged_negative_dead_time) os << "# warning: negative dead time\n";
    write_output(os.str(), opt.output);
    return 0;
}

EtalonParams window_guess_from(const json& cfg) {
    EtalonParams p;
    p.n = 1.45;  // matches the simulator's default window
    const json j = cfg.value("window_guess", json::object());
    p.n = j.value("n", p.n);
    p.n_a = j.value("n_air", p.n_a);
    p.thickness_m = j.value("thickness_m", p.thickness_m);
    p.visibility = j.value("visibility", p.visibility);
    p.validate();
    return p;
}

int cmd_sweep_fit(const CommonOpts& opt) {
    const json cfg = load_config(opt.config_path);
    const Dataset ds = load_dataset(opt.input);
    const SweepAnalysis sa =
        analyze_sweep(ds, constants_for(ds, cfg), window_guess_from(cfg));
    const ReportFormat fmt = report_format_from_string(opt.format);
    const double k = opt.coverage_factor;

    if (fmt == ReportFormat::Json) {
        json out;
        out["optical_thickness_m"] = sa.fit.optical_thickness_m;
        out["visibility"] = sa.fit.visibility;
        out["eta_base_intercept"] = sa.fit.eta_base_intercept;
        out["eta_base_slope"] = sa.fit.eta_base_slope;
        out["lambda_ref_m"] = sa.fit.lambda_ref_m;
        out["ambiguity_class"] = sa.fit.ambiguity_class;
        out["residual_chi2"] = sa.fit.residual_chi2;
        out["dof"] = sa.fit.dof;
        out["converged"] = sa.fit.converged;
        out["baseline_only"] = sa.fit.baseline_only;
        out["points"] = efficiency_json(sa.efficiency, k);
        out["coverage_factor"] = k;
        out["provenance"] = provenance_json({opt.input}, ds.meta.seed);
        write_output(out.dump(2) + "\n", opt.output);
        return 0;
    }

    std::ostringstream os;
    os << render_rows(efficiency_rows(sa.efficiency, k), fmt);
    os << "# n*L = " << format_double(sa.fit.optical_thickness_m) << " m\n"
       << "# visibility = " << format_double(sa.fit.visibility) << "\n"
       << "# baseline = " << format_double(sa.fit.eta_base_intercept) << " + "
       << format_double(sa.fit.eta_base_slope) << " * (lambda - "
       << format_double(sa.fit.lambda_ref_m) << ")\n"
       << "# chi2/dof = " << format_double(sa.fit.residual_chi2) << "/" << sa.fit.dof
       << (sa.fit.baseline_only ? "  (baseline only)" : "") << "\n";
    write_output(os.str(), opt.output);
    return 0;
}

EfficiencyInputs inputs_from_json(const json& j) {
    auto get = [&](const char* key) {
        if (!j.contains(key)) {
            throw ValidationError(std::string("budget input missing '") + key + "'");
        }
        return quantity_from_json(j[key]);
    };
    EfficiencyInputs in;
    in.n_prime = get("N_prime");
    in.n_env = get("N_env");
    in.a_prime = get("A_prime");
    in.a_env = get("A_env");
    in.tau = get("tau");
    in.eps = get("eps");
    in.inst.s = get("s");
    in.inst.cal_c = get("C");
    in.inst.lens_t = get("T");
    in.inst.lambda = get("lambda");
    in.inst.t = get("t");
    in.inst.validate();
    return in;
}

int cmd_budget(const CommonOpts& opt) {
    std::ifstream in(opt.input);
    if (!in) throw ValidationError("cannot open " + opt.input);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(opt.input + ": " + std::string(e.what()));
    }
    const EfficiencyInputs inputs = inputs_from_json(j);
    const EfficiencyPoint point = efficiency_point(inputs);
    const std::vector<BudgetRow> rows = uncertainty_budget(inputs);
    const ReportFormat fmt = report_format_from_string(opt.format);
    write_output(render_budget(rows, point.eta, opt.coverage_factor, fmt), opt.output);
    return 0;
}

int cmd_scan_flat(const CommonOpts& opt) {
    const json cfg = load_config(opt.config_path);
    const ScanMap map = load_scan_map(opt.input);
    const double window =
        cfg.value("scan", json::object()).value("window_size_m", 50e-6);
    const FlatRegion region = find_flat_region(map, window);
    const ReportFormat fmt = report_format_from_string(opt.format);

    if (fmt == ReportFormat::Json) {
        json out;
        out["x_m"] = region.x_m;
        out["y_m"] = region.y_m;
        out["flatness"] = region.flatness;
        out["window_size_m"] = window;
        out["provenance"] = provenance_json({opt.input}, 0);
        write_output(out.dump(2) + "\n", opt.output);
        return 0;
    }
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"x_m", "y_m", "flatness", "window_size_m"});
    rows.push_back({format_double(region.x_m), format_double(region.y_m),
                    format_double(region.flatness), format_double(window)});
    write_output(render_rows(rows, fmt), opt.output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-photon detector efficiency calibration toolkit"};
    app.require_subcommand(1);

    CommonOpts opt;
    std::string scenario;
    auto add_common = [&](CLI::App* sub, bool with_input) {
        if (with_input) {
            sub->add_option("-i,--input", opt.input, "input file")->required();
        }
        sub->add_option("-o,--output", opt.output, "output file (default: stdout)");
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--coverage-factor", opt.coverage_factor,
                        "scale reported uncertainties by K");
        sub->add_option("--format", opt.format, "table, csv or json")
            ->check(CLI::IsMember({"table", "csv", "json"}));
        sub->add_option("--seed", opt.seed, "RNG seed");
    };

    CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
    sim_cmd->add_option("--scenario", scenario, "tau, flux-sweep, wavelength-sweep or area-scan")
        ->required()
        ->check(CLI::IsMember({"tau", "flux-sweep", "wavelength-sweep", "area-scan"}));
    add_common(sim_cmd, false);

    CLI::App* tau_cmd = app.add_subcommand("tau", "attenuation-chain analysis");
    add_common(tau_cmd, true);
    CLI::App* eff_cmd = app.add_subcommand("efficiency", "per-group efficiency points");
    add_common(eff_cmd, true);
    CLI::App* zf_cmd = app.add_subcommand("zero-flux", "zero-flux extrapolation");
    add_common(zf_cmd, true);
    CLI::App* sw_cmd = app.add_subcommand("sweep-fit", "etalon fringe fit");
    add_common(sw_cmd, true);
    CLI::App* bud_cmd = app.add_subcommand("budget", "uncertainty budget from inputs JSON");
    add_common(bud_cmd, true);
    CLI::App* scan_cmd = app.add_subcommand("scan-flat", "find the flattest scan window");
    add_common(scan_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (sim_cmd->parsed()) return cmd_simulate(opt, scenario);
        if (tau_cmd->parsed()) return cmd_tau(opt);
        if (eff_cmd->parsed()) return cmd_efficiency(opt);
        if (zf_cmd->parsed()) return cmd_zero_flux(opt);
        if (sw_cmd->parsed()) return cmd_sweep_fit(opt);
        if (bud_cmd->parsed()) return cmd_budget(opt);
        if (scan_cmd->parsed()) return cmd_scan_flat(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
