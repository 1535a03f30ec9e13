#include "spdcal/simulator.hpp"

#include "spdcal/errors.hpp"
#include "spdcal/rng.hpp"

#include <cmath>

namespace spdcal::sim {

namespace {

constexpr std::uint64_t kSaltDay = 0x646179ULL;      // per-day draws
constexpr std::uint64_t kSaltRun = 0x72756eULL;      // per-run draws
constexpr std::uint64_t kSaltPixel = 0x706978ULL;    // area-scan pixels
constexpr std::uint64_t kSaltScenario = 0x736365ULL; // scenario-level draws

nlohmann::json quantity_json(double value, double u, const std::string& unit) {
    return {{"value", value}, {"u", u}, {"unit", unit}};
}

nlohmann::json constants_json(const Config& c) {
    const double tau = c.attenuators.tau_true();
    return {
        {"s", quantity_json(c.photodiode.responsivity_a_per_w, 1.9e-3, "A/W")},
        {"C", quantity_json(c.cal_factor_c, 1.0e-5, "1")},
        {"T", quantity_json(c.lens_transmissivity, 3.0e-5, "1")},
        {"lambda", quantity_json(c.source.wavelength_m, 6.0e-12, "m")},
        {"t", quantity_json(c.acquisition_time_s, 1.0e-3, "s")},
        {"tau", quantity_json(tau, c.attenuators.day_to_day_relative_sd * tau, "1")},
    };
}

double incident_rate(double power_w, double tau, double lens_t, double lambda_m,
                     const PhysicalConstants& pc) {
    return power_w * tau * lens_t * lambda_m / (pc.h * pc.c);
}

} // namespace

Config Config::noiseless() const {
    Config c = *this;
    c.source.relative_drift_sd = 0.0;
    c.photodiode.relative_noise_sd = 0.0;
    c.photodiode.dark_current_a = 0.0;
    c.detector.dark_rate_hz = 0.0;
    c.attenuators.day_to_day_relative_sd = 0.0;
    c.counting_noise = false;
    return c;
}

double spad_measured_rate(double incident_rate_hz, const DetectorModel& det,
                          double lambda_m) {
    if (!(incident_rate_hz >= 0.0) || !std::isfinite(incident_rate_hz)) {
        throw DomainError("incident rate must be finite and >= 0");
    }
    const double detected =
        det.effective_efficiency(lambda_m) * incident_rate_hz + det.dark_rate_hz;
    return detected / (1.0 + detected * det.dead_time_s);
}

long long spad_counts(double incident_rate_hz, const DetectorModel& det,
                      double lambda_m, double t_s, std::uint64_t seed) {
    const double mean = spad_measured_rate(incident_rate_hz, det, lambda_m) * t_s;
    rng::Stream rs(seed, kSaltRun);
    return rs.poisson(mean);
}

double photodiode_current(double power_w, const PhotodiodeModel& pd, double cal_factor_c,
                          std::uint64_t seed) {
    if (!(power_w >= 0.0)) throw DomainError("optical power must be >= 0");
    double photo = power_w * pd.responsivity_a_per_w / cal_factor_c;
    if (pd.relative_noise_sd > 0.0) {
        rng::Stream rs(seed, kSaltRun);
        photo *= 1.0 + rs.normal(0.0, pd.relative_noise_sd);
    }
    return photo + pd.dark_current_a;
}

namespace {

struct RunEmitter {
    Dataset& ds;
    const Config& cfg;
    std::uint64_t seed;

    void siph_run(long long run_id, double source_power_w, double tau_path,
                  RunKind kind, AttenuatorSetting setting) {
        rng::Stream rs(seed, kSaltRun, static_cast<std::uint64_t>(run_id));
        const double drift =
            1.0 + rs.normal(0.0, cfg.source.relative_drift_sd);
        const double p = source_power_w * drift;
        RunRecord r;
        r.run_id = run_id;
        r.kind = kind;
        r.setting = setting;
        r.duration_s = cfg.acquisition_time_s;
        r.wavelength_m = cfg.source.wavelength_m;
        r.monitor_power_w = kind == RunKind::SiphBackground ? 0.0 : p;
        r.value = photodiode_current(p * tau_path, cfg.photodiode, cfg.cal_factor_c,
                                     rs.next_u64());
        ds.runs.push_back(r);
    }

    void dut_run(long long run_id, double source_power_w, double tau_path,
                 RunKind kind, AttenuatorSetting setting, double lambda_m) {
        rng::Stream rs(seed, kSaltRun, static_cast<std::uint64_t>(run_id));
        const double drift =
            1.0 + rs.normal(0.0, cfg.source.relative_drift_sd);
        const double p = source_power_w * drift;
        const double inc = incident_rate(p * tau_path, 1.0, cfg.lens_transmissivity,
                                         lambda_m, PhysicalConstants{});
        RunRecord r;
        r.run_id = run_id;
        r.kind = kind;
        r.setting = setting;
        r.duration_s = cfg.acquisition_time_s;
        r.wavelength_m = lambda_m;
        r.monitor_power_w = kind == RunKind::DutBackground ? 0.0 : p;
        if (cfg.counting_noise) {
            r.value = static_cast<double>(
                spad_counts(inc, cfg.detector, lambda_m, cfg.acquisition_time_s,
                            rs.next_u64()));
        } else {
            r.value = spad_measured_rate(inc, cfg.detector, lambda_m) *
                      cfg.acquisition_time_s;
        }
        ds.runs.push_back(r);
    }
};

} // namespace

Dataset simulate_tau_run(const Config& config, int n_samples, int n_days,
                         std::uint64_t seed) {
    if (n_samples < 2) throw DomainError("tau run needs at least 2 samples per setting");
    if (n_days < 1) throw DomainError("tau run needs at least 1 day");

    Dataset ds;
    ds.meta.scenario = "tau";
    ds.meta.seed = seed;
    ds.meta.generator = "spdcal-sim";
    ds.meta.constants = constants_json(config);
    RunEmitter emit{ds, config, seed};

    nlohmann::json day_truth = nlohmann::json::array();
    const double stage_sd =
        config.attenuators.day_to_day_relative_sd / std::sqrt(2.0);
    for (int day = 0; day < n_days; ++day) {
        rng::Stream day_rs(seed, kSaltDay, static_cast<std::uint64_t>(day));
        const double tau30 =
            config.attenuators.tau30_true * (1.0 + day_rs.normal(0.0, stage_sd));
        const double tau40 =
            config.attenuators.tau40_true * (1.0 + day_rs.normal(0.0, stage_sd));
        day_truth.push_back(tau30 * tau40);

        long long next_id = day * ds.meta.group_stride;
        const struct {
            AttenuatorSetting setting;
            double tau_path;
        } settings[] = {
            {AttenuatorSetting::Ref0dB, 1.0},
            {AttenuatorSetting::A30dB, tau30},
            {AttenuatorSetting::A40dB, tau40},
            {AttenuatorSetting::A70dB, tau30 * tau40},
        };
        for (const auto& s : settings) {
            for (int i = 0; i < n_samples; ++i) {
                emit.siph_run(next_id++, config.source.mean_power_w, s.tau_path,
                              RunKind::SiphCurrent, s.setting);
            }
        }
        for (int i = 0; i < n_samples; ++i) {
            emit.siph_run(next_id++, config.source.mean_power_w, 0.0,
                          RunKind::SiphBackground, AttenuatorSetting::Ref0dB);
        }
    }

    ds.meta.truth = nlohmann::json{
        {"tau", config.attenuators.tau_true()},
        {"tau30", config.attenuators.tau30_true},
        {"tau40", config.attenuators.tau40_true},
        {"day_to_day_relative_sd", config.attenuators.day_to_day_relative_sd},
        {"tau_day", day_truth},
    };
    ds.validate();
    return ds;
}

namespace {

/// Source power producing the requested measured net count rate.
double backsolve_power(const Config& cfg, double target_net_rate_hz, double lambda_m) {
    const DetectorModel& det = cfg.detector;
    const double dark_measured =
        det.dark_rate_hz / (1.0 + det.dark_rate_hz * det.dead_time_s);
    const double m_tot = target_net_rate_hz + dark_measured;
    if (m_tot * det.dead_time_s >= 1.0) {
        throw DomainError("target rate unreachable with this dead time");
    }
    const double detected = m_tot / (1.0 - m_tot * det.dead_time_s);
    const double inc = (detected - det.dark_rate_hz) / det.effective_efficiency(lambda_m);
    if (!(inc > 0.0)) throw DomainError("target rate below the dark level");
    const PhysicalConstants pc;
    return inc * pc.h * pc.c /
           (lambda_m * cfg.attenuators.tau_true() * cfg.lens_transmissivity);
}

void emit_point_group(RunEmitter& emit, const Config& cfg, long long group,
                      double source_power_w, double lambda_m) {
    long long next_id = group * emit.ds.meta.group_stride;
    for (int i = 0; i < cfg.runs_per_point; ++i) {
        emit.dut_run(next_id++, source_power_w * cfg.eps_true,
                     cfg.attenuators.tau_true(), RunKind::DutCounts,
                     AttenuatorSetting::A70dB, lambda_m);
    }
    for (int i = 0; i < cfg.runs_per_point; ++i) {
        emit.siph_run(next_id++, source_power_w, 1.0, RunKind::SiphCurrent,
                      AttenuatorSetting::Ref0dB);
    }
}

void emit_background_group(RunEmitter& emit, const Config& cfg, long long group,
                           double lambda_m) {
    long long next_id = group * emit.ds.meta.group_stride;
    for (int i = 0; i < cfg.runs_per_point; ++i) {
        emit.dut_run(next_id++, cfg.source.mean_power_w, 0.0, RunKind::DutBackground,
                     AttenuatorSetting::A70dB, lambda_m);
    }
    for (int i = 0; i < cfg.runs_per_point; ++i) {
        emit.siph_run(next_id++, cfg.source.mean_power_w, 0.0, RunKind::SiphBackground,
                      AttenuatorSetting::Ref0dB);
    }
}

} // namespace

Dataset simulate_flux_sweep(const Config& config, std::span<const double> target_rates_hz,
                            std::uint64_t seed) {
    if (target_rates_hz.empty()) throw DomainError("flux sweep needs target rates");
    for (std::size_t i = 0; i < target_rates_hz.size(); ++i) {
        if (!(target_rates_hz[i] > 0.0)) throw DomainError("target rates must be > 0");
        if (i > 0 && !(target_rates_hz[i] > target_rates_hz[i - 1])) {
            throw DomainError("target rates must be sorted ascending");
        }
    }

    Dataset ds;
    ds.meta.scenario = "flux-sweep";
    ds.meta.seed = seed;
    ds.meta.generator = "spdcal-sim";
    ds.meta.constants = constants_json(config);

    // One day-level attenuation draw for the whole sweep.
    Config day_cfg = config;
    {
        rng::Stream day_rs(seed, kSaltScenario);
        const double stage_sd =
            config.attenuators.day_to_day_relative_sd / std::sqrt(2.0);
        day_cfg.attenuators.tau30_true *= 1.0 + day_rs.normal(0.0, stage_sd);
        day_cfg.attenuators.tau40_true *= 1.0 + day_rs.normal(0.0, stage_sd);
    }

    RunEmitter emit{ds, day_cfg, seed};
    const double lambda = config.source.wavelength_m;
    for (std::size_t g = 0; g < target_rates_hz.size(); ++g) {
        const double p0 = backsolve_power(day_cfg, target_rates_hz[g], lambda);
        emit_point_group(emit, day_cfg, static_cast<long long>(g), p0, lambda);
    }
    emit_background_group(emit, day_cfg, static_cast<long long>(target_rates_hz.size()),
                          lambda);

    const double eta0 = config.detector.effective_efficiency(lambda);
    ds.meta.truth = nlohmann::json{
        {"eta0", eta0},
        {"dead_time_s", config.detector.dead_time_s},
        // The rate-linearized efficiency model has slope eta0 * D; this is
        // what a straight-line fit against measured rate recovers.
        {"linear_dead_time_s", eta0 * config.detector.dead_time_s},
        {"tau_day", day_cfg.attenuators.tau_true()},
        {"eps_true", config.eps_true},
        {"target_rates_hz", std::vector<double>(target_rates_hz.begin(),
                                                target_rates_hz.end())},
    };
    ds.validate();
    return ds;
}

Dataset simulate_wavelength_sweep(const Config& config, std::span<const double> lambdas_m,
                                  double target_counts, std::uint64_t seed) {
    if (lambdas_m.empty()) throw DomainError("wavelength sweep needs a lambda list");
    for (std::size_t i = 1; i < lambdas_m.size(); ++i) {
        if (!(lambdas_m[i] > lambdas_m[i - 1])) {
            throw DomainError("wavelengths must be strictly increasing");
        }
    }
    if (!(target_counts > 0.0)) throw DomainError("target counts must be > 0");

    Dataset ds;
    ds.meta.scenario = "wavelength-sweep";
    ds.meta.seed = seed;
    ds.meta.generator = "spdcal-sim";
    ds.meta.constants = constants_json(config);

    Config day_cfg = config;
    {
        rng::Stream day_rs(seed, kSaltScenario);
        const double stage_sd =
            config.attenuators.day_to_day_relative_sd / std::sqrt(2.0);
        day_cfg.attenuators.tau30_true *= 1.0 + day_rs.normal(0.0, stage_sd);
        day_cfg.attenuators.tau40_true *= 1.0 + day_rs.normal(0.0, stage_sd);
    }

    RunEmitter emit{ds, day_cfg, seed};
    const double target_rate = target_counts / config.acquisition_time_s;
    for (std::size_t g = 0; g < lambdas_m.size(); ++g) {
        const double p0 = backsolve_power(day_cfg, target_rate, lambdas_m[g]);
        emit_point_group(emit, day_cfg, static_cast<long long>(g), p0, lambdas_m[g]);
    }
    emit_background_group(emit, day_cfg, static_cast<long long>(lambdas_m.size()),
                          config.source.wavelength_m);

    ds.meta.truth = nlohmann::json{
        {"eta_true", config.detector.eta_true},
        {"optical_thickness_m",
         config.detector.window.n * config.detector.window.thickness_m},
        {"visibility", config.detector.window.visibility},
        {"window_n", config.detector.window.n},
        {"dead_time_s", config.detector.dead_time_s},
        {"tau_day", day_cfg.attenuators.tau_true()},
        {"target_counts", target_counts},
    };
    ds.validate();
    return ds;
}

std::vector<AreaDip> default_area_dips() {
    return {
        {-60e-6, 25e-6, 12e-6, 0.75},
        {-50e-6, -45e-6, 10e-6, 0.6},
    };
}

namespace {

double efficiency_map(const DetectorModel& det, double x, double y) {
    const double r = std::hypot(x, y);
    if (r > 0.5 * det.active_area_diameter_m) return 0.0;
    double eta = det.eta_true;
    for (const auto& dip : det.area_dips) {
        const double d2 = (x - dip.x_m) * (x - dip.x_m) + (y - dip.y_m) * (y - dip.y_m);
        eta *= 1.0 - dip.depth * std::exp(-0.5 * d2 / (dip.sigma_m * dip.sigma_m));
    }
    return eta;
}

} // namespace

ScanMap simulate_area_scan(const Config& config, const ScanGrid& grid, std::uint64_t seed) {
    if (!(grid.step_m > 0.0)) throw DomainError("scan step must be > 0");
    if (!(grid.half_extent_m >= 0.5 * config.detector.active_area_diameter_m)) {
        throw DomainError("scan extent must cover the active area");
    }

    ScanMap map;
    map.step_m = grid.step_m;
    map.nx = map.ny = 2 * static_cast<int>(std::lround(grid.half_extent_m / grid.step_m)) + 1;
    map.origin_x_m = -0.5 * (map.nx - 1) * grid.step_m;
    map.origin_y_m = -0.5 * (map.ny - 1) * grid.step_m;
    map.counts.assign(static_cast<std::size_t>(map.nx) * map.ny, 0.0);

    // Beam intensity sd from the 1/e^2 diameter: sigma = waist/4.
    const double sigma = config.detector.beam_waist_m / 4.0;
    const double sub = sigma / 3.0;
    const int half_steps = static_cast<int>(std::ceil(3.0 * sigma / sub));
    const double peak_counts = 1e5 * config.acquisition_time_s;

    for (int iy = 0; iy < map.ny; ++iy) {
        for (int ix = 0; ix < map.nx; ++ix) {
            const double x0 = map.x_of(ix), y0 = map.y_of(iy);
            double acc = 0.0, norm = 0.0;
            for (int jy = -half_steps; jy <= half_steps; ++jy) {
                for (int jx = -half_steps; jx <= half_steps; ++jx) {
                    const double u = jx * sub, v = jy * sub;
                    const double w = std::exp(-0.5 * (u * u + v * v) / (sigma * sigma));
                    acc += w * efficiency_map(config.detector, x0 + u, y0 + v);
                    norm += w;
                }
            }
            const double mean = peak_counts * acc / norm / config.detector.eta_true;
            const std::size_t idx = static_cast<std::size_t>(iy) * map.nx + ix;
            if (config.counting_noise) {
                rng::Stream rs(seed, kSaltPixel, idx);
                map.counts[idx] = static_cast<double>(rs.poisson(mean));
            } else {
                map.counts[idx] = mean;
            }
        }
    }

    nlohmann::json dips = nlohmann::json::array();
    for (const auto& d : config.detector.area_dips) {
        dips.push_back({{"x_m", d.x_m}, {"y_m", d.y_m}, {"sigma_m", d.sigma_m},
                        {"depth", d.depth}});
    }
    map.truth = nlohmann::json{
        {"eta_true", config.detector.eta_true},
        {"active_area_diameter_m", config.detector.active_area_diameter_m},
        {"beam_waist_m", config.detector.beam_waist_m},
        {"peak_counts", peak_counts},
        {"dips", dips},
    };
    return map;
}

} // namespace spdcal::sim
