#pragma once

#include "spdcal/constants.hpp"
#include "spdcal/dataset.hpp"
#include "spdcal/etalon.hpp"

#include <cstdint>
#include <span>

namespace spdcal::sim {

/// CW laser source seen at the monitor stage.
struct SourceModel {
    double mean_power_w = 4.0e-8;
    double relative_drift_sd = 5.0e-3;  // per-sample power fluctuation
    double wavelength_m = 850.711e-9;
};

/// A localized efficiency depression on the active area.
struct AreaDip {
    double x_m = 0.0;
    double y_m = 0.0;
    double sigma_m = 12e-6;
    double depth = 0.5;  // fractional efficiency loss at the dip center
};

/// Free-running SPAD under test.
struct DetectorModel {
    double eta_true = 0.5526;      // intrinsic efficiency before the window
    double dead_time_s = 25e-9;    // non-paralyzable
    double dark_rate_hz = 28.0;
    double active_area_diameter_m = 200e-6;
    double beam_waist_m = 40e-6;   // 1/e^2 intensity diameter of the focused spot
    EtalonParams window{1.45, 1.00027, 0.5e-3, 0.0};
    std::vector<AreaDip> area_dips;  // used by the area-scan scenario

    /// eta_true scaled by the window transmittance at lambda.
    double effective_efficiency(double lambda_m) const {
        return eta_true * window_transmittance(lambda_m, window);
    }
};

/// SI-traceable silicon photodiode plus picoammeter.
struct PhotodiodeModel {
    double responsivity_a_per_w = 0.4766;  // numeric value of the published s
    double dark_current_a = 4.88e-14;
    double relative_noise_sd = 2.5e-4;
};

/// Dual fiber-coupled attenuator stage (30 dB + 40 dB splitters).
struct AttenuatorBank {
    double tau30_true = 9.99e-4;
    double tau40_true = 2.16226226226226e-4;  // product = 2.1601e-7
    double day_to_day_relative_sd = 3.2e-3;   // on the composed transmissivity

    double tau_true() const { return tau30_true * tau40_true; }
};

/// Everything the virtual apparatus needs for one scenario.
struct Config {
    SourceModel source;
    DetectorModel detector;
    PhotodiodeModel photodiode;
    AttenuatorBank attenuators;
    double cal_factor_c = 1.000023;
    double lens_transmissivity = 0.985;
    double acquisition_time_s = 1.0;
    double eps_true = 1.0;  // DUT-phase vs Si-ph-phase mean-power ratio
    int runs_per_point = 25;
    bool counting_noise = true;  // Poisson sampling of counts

    /// Copy with every stochastic ingredient disabled; downstream analyses
    /// then recover the configured truth exactly.
    Config noiseless() const;
};

/// Measured mean rate after the window, dark counts and non-paralyzable
/// dead time: R_det/(1 + R_det D) with R_det = eta_eff * incident + dark.
double spad_measured_rate(double incident_rate_hz, const DetectorModel& det,
                          double lambda_m);

/// Poisson-sampled counts in a window of t seconds; deterministic per seed.
long long spad_counts(double incident_rate_hz, const DetectorModel& det,
                      double lambda_m, double t_s, std::uint64_t seed);

/// Picoammeter reading for a given optical power: A = P * s / C + dark,
/// with multiplicative Gaussian noise of the configured relative sd.
double photodiode_current(double power_w, const PhotodiodeModel& pd, double cal_factor_c,
                          std::uint64_t seed);

/// Attenuation-repeatability scenario: n_days days, each with a fresh
/// day-level transmissivity draw and n_samples current samples per
/// attenuator setting plus background runs.
Dataset simulate_tau_run(const Config& config, int n_samples, int n_days,
                         std::uint64_t seed);

/// Efficiency-vs-rate scenario: one run group per target measured count
/// rate; the source power is back-solved per point.
Dataset simulate_flux_sweep(const Config& config, std::span<const double> target_rates_hz,
                            std::uint64_t seed);

/// Wavelength-dependence scenario: one run group per wavelength with the
/// source power adjusted so the expected corrected counts stay near
/// target_counts.
Dataset simulate_wavelength_sweep(const Config& config, std::span<const double> lambdas_m,
                                  double target_counts, std::uint64_t seed);

struct ScanGrid {
    double half_extent_m = 150e-6;  // scan covers [-half, +half] in x and y
    double step_m = 10e-6;
};

/// Active-area scan: Gaussian beam convolved with the 2D efficiency map
/// (uniform disk with the configured dips), Poisson counts per pixel.
ScanMap simulate_area_scan(const Config& config, const ScanGrid& grid, std::uint64_t seed);

/// Default map blemishes: two dips on the left side of the active area.
std::vector<AreaDip> default_area_dips();

} // namespace spdcal::sim
