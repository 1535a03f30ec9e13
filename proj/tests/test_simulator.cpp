#include "spdcal/constants.hpp"
#include "spdcal/dataset.hpp"
#include "spdcal/errors.hpp"
#include "spdcal/simulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace spdcal;
using namespace spdcal::sim;

TEST_CASE("dead time compresses the detected rate") {
    DetectorModel det;
    det.eta_true = 1.0;
    det.dark_rate_hz = 0.0;
    det.window.visibility = 0.0;
    det.dead_time_s = 25e-9;
    // 1e6 detections/s through a 25 ns non-paralyzable dead time
    CHECK(spad_measured_rate(1e6, det, 850e-9) ==
          doctest::Approx(1e6 / 1.025).epsilon(1e-12));
    det.dead_time_s = 0.0;
    CHECK(spad_measured_rate(1e6, det, 850e-9) == doctest::Approx(1e6).epsilon(1e-12));
    CHECK_THROWS_AS(spad_measured_rate(-1.0, det, 850e-9), DomainError);
}

TEST_CASE("measured rate is monotone in the incident rate") {
    DetectorModel det;
    double prev = 0.0;
    for (double inc = 1e3; inc < 1e8; inc *= 2.0) {
        const double m = spad_measured_rate(inc, det, 850e-9);
        CHECK(m > prev);
        CHECK(m < 1.0 / det.dead_time_s);  // saturation bound
        prev = m;
    }
}

TEST_CASE("spad counts are Poisson around the configured mean") {
    DetectorModel det;
    det.eta_true = 0.5;
    det.dark_rate_hz = 0.0;
    det.window.visibility = 0.0;
    const double mean = spad_measured_rate(2e5, det, 850e-9) * 1.0;
    double sum = 0.0, sum2 = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const double c = static_cast<double>(spad_counts(2e5, det, 850e-9, 1.0, i));
        sum += c;
        sum2 += c * c;
    }
    const double sample_mean = sum / n;
    const double sample_var = sum2 / n - sample_mean * sample_mean;
    // mean within 5 standard errors; variance within 20% (Poisson: var = mean)
    CHECK(std::abs(sample_mean - mean) < 5.0 * std::sqrt(mean / n));
    CHECK(sample_var == doctest::Approx(mean).epsilon(0.2));
}

TEST_CASE("photodiode current inverts back to the optical power") {
    PhotodiodeModel pd;
    pd.relative_noise_sd = 0.0;
    const double c_cal = 1.000023;
    // the published current difference corresponds to C*dA/s of power
    const double da = 1.92807e-8;
    const double power = c_cal * da / pd.responsivity_a_per_w;
    CHECK(power == doctest::Approx(4.0454e-8).epsilon(1e-4));
    const double current = photodiode_current(power, pd, c_cal, 0);
    CHECK(current - pd.dark_current_a == doctest::Approx(da).epsilon(1e-12));
    CHECK_THROWS_AS(photodiode_current(-1e-9, pd, c_cal, 0), DomainError);
}

TEST_CASE("flux sweep hits its target rates when noiseless") {
    Config cfg = Config{}.noiseless();
    const double rates[] = {1e4, 1e5, 1e6};
    const Dataset ds = simulate_flux_sweep(cfg, rates, 1);
    for (int g = 0; g < 3; ++g) {
        for (const auto& r : ds.runs) {
            if (ds.group_of(r) == g && r.kind == RunKind::DutCounts) {
                CHECK(r.value / r.duration_s ==
                      doctest::Approx(rates[g]).epsilon(1e-9));
            }
        }
    }
    REQUIRE(ds.meta.truth.has_value());
    const auto& truth = *ds.meta.truth;
    CHECK(truth["eta0"].get<double>() == doctest::Approx(0.5526));
    CHECK(truth["linear_dead_time_s"].get<double>() ==
          doctest::Approx(0.5526 * 25e-9).epsilon(1e-12));
}

TEST_CASE("energy bookkeeping ties counts to the monitor power") {
    Config cfg = Config{}.noiseless();
    const double rates[] = {2e4};
    const Dataset ds = simulate_flux_sweep(cfg, rates, 1);
    const PhysicalConstants pc;
    double counts = -1.0, power = -1.0;
    for (const auto& r : ds.runs) {
        if (ds.group_of(r) != 0) continue;
        if (r.kind == RunKind::DutCounts) {
            counts = r.value;
            power = r.monitor_power_w;
        }
    }
    REQUIRE(counts > 0.0);
    // photons after the chain and lens, detected with eta, then dead time
    const double inc = power * cfg.attenuators.tau_true() * cfg.lens_transmissivity *
                       cfg.source.wavelength_m / (pc.h * pc.c);
    const double detected = cfg.detector.eta_true * inc;
    const double expected = detected / (1.0 + detected * cfg.detector.dead_time_s);
    CHECK(counts == doctest::Approx(expected * cfg.acquisition_time_s).epsilon(1e-9));
}

TEST_CASE("tau scenario layout and truth sidecar") {
    Config cfg;
    const Dataset ds = simulate_tau_run(cfg, 10, 3, 9);
    // per day: 4 settings x 10 samples + 10 backgrounds
    CHECK(ds.runs.size() == 3u * 50u);
    int backgrounds = 0;
    for (const auto& r : ds.runs) {
        if (r.kind == RunKind::SiphBackground) ++backgrounds;
    }
    CHECK(backgrounds == 30);
    REQUIRE(ds.meta.truth.has_value());
    CHECK((*ds.meta.truth)["tau"].get<double>() ==
          doctest::Approx(2.1601e-7).epsilon(1e-10));
    CHECK((*ds.meta.truth)["tau_day"].size() == 3);
    CHECK_THROWS_AS(simulate_tau_run(cfg, 1, 3, 9), DomainError);
}

TEST_CASE("simulator output is byte-identical per seed") {
    Config cfg;
    const double rates[] = {1e4, 3e5, 1.8e6};
    const std::string a = dataset_to_string(simulate_flux_sweep(cfg, rates, 42));
    const std::string b = dataset_to_string(simulate_flux_sweep(cfg, rates, 42));
    CHECK(a == b);
    const std::string c = dataset_to_string(simulate_flux_sweep(cfg, rates, 43));
    CHECK(a != c);

    const std::string m1 = scan_map_to_string(simulate_area_scan(cfg, {}, 7));
    const std::string m2 = scan_map_to_string(simulate_area_scan(cfg, {}, 7));
    CHECK(m1 == m2);
}

TEST_CASE("wavelength sweep modulates efficiency through the window") {
    Config cfg = Config{}.noiseless();
    cfg.detector.window.visibility = 1.0;
    std::vector<double> lambdas;
    for (int i = 0; i < 21; ++i) lambdas.push_back(849.5e-9 + 0.05e-9 * i);
    const Dataset ds = simulate_wavelength_sweep(cfg, lambdas, 1e5, 3);
    // counts are held near target while the per-group power moves instead
    double pmin = 1e9, pmax = 0.0;
    for (const auto& r : ds.runs) {
        if (r.kind == RunKind::DutCounts) {
            CHECK(r.value / r.duration_s == doctest::Approx(1e5).epsilon(1e-6));
        }
        if (r.kind == RunKind::SiphCurrent) {
            pmin = std::min(pmin, r.monitor_power_w);
            pmax = std::max(pmax, r.monitor_power_w);
        }
    }
    CHECK(pmax / pmin > 1.05);  // etalon forces visible power compensation
    CHECK_THROWS_AS(simulate_wavelength_sweep(cfg, std::vector<double>{}, 1e5, 3),
                    DomainError);
}

TEST_CASE("area scan shows the configured dips") {
    Config cfg = Config{}.noiseless();
    cfg.detector.area_dips = default_area_dips();
    const ScanMap map = simulate_area_scan(cfg, {}, 2);
    auto nearest = [&](double x, double y) {
        const int ix = static_cast<int>(std::lround((x - map.origin_x_m) / map.step_m));
        const int iy = static_cast<int>(std::lround((y - map.origin_y_m) / map.step_m));
        return map.at(ix, iy);
    };
    // dip centers read lower than their mirror images on the clean side
    // (the beam convolution shallows but does not hide the dips)
    CHECK(nearest(-60e-6, 25e-6) < 0.8 * nearest(60e-6, 25e-6));
    CHECK(nearest(-50e-6, -45e-6) < 0.9 * nearest(50e-6, -45e-6));
    // far outside the active area there is no signal
    CHECK(nearest(-150e-6, -150e-6) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(simulate_area_scan(cfg, {50e-6, 10e-6}, 2), DomainError);
}
