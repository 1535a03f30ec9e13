#include "spdcal/errors.hpp"
#include "spdcal/regression.hpp"
#include "spdcal/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace spdcal;

namespace {

EtalonParams sweep_window(double visibility = 1.0) {
    EtalonParams p;
    p.n = 1.45;
    p.n_a = 1.00027;
    p.thickness_m = 0.5e-3;
    p.visibility = visibility;
    return p;
}

std::vector<SweepPoint> synthetic_sweep(const EtalonParams& truth, double eta_base,
                                        double noise_u, int n_points,
                                        std::uint64_t seed) {
    std::vector<SweepPoint> pts;
    rng::Stream rs(seed, 0xe7a1);
    for (int i = 0; i < n_points; ++i) {
        const double lambda = 849.2e-9 + 3e-9 * i / (n_points - 1.0);
        double eta = eta_base * window_transmittance(lambda, truth);
        if (noise_u > 0.0) eta += rs.normal(0.0, noise_u);
        pts.push_back({lambda, Quantity(eta, noise_u)});
    }
    return pts;
}

} // namespace

TEST_CASE("two exact points determine the line exactly") {
    const double r1 = 1e4, e1 = 0.55, r2 = 1e6, e2 = 0.5365;
    const FluxPoint pts[] = {{r1, e1, 0.0}, {r2, e2, 0.0}};
    const ZeroFluxFit fit = fit_zero_flux(pts, 0.0);
    const double slope = (e2 - e1) / (r2 - r1);
    CHECK(fit.eta0.value == doctest::Approx(e1 - slope * r1).epsilon(1e-12));
    CHECK(fit.dead_time.value == doctest::Approx(-slope).epsilon(1e-12));
    CHECK(fit.dof == 0);
    CHECK_FALSE(fit.flagged_negative_dead_time);
}

TEST_CASE("noiseless linear data is recovered to 1e-10") {
    const double eta0 = 0.5526, slope = 1.38e-8;
    std::vector<FluxPoint> pts;
    for (double r : {5e3, 2e4, 8e4, 3e5, 1e6, 2e6}) {
        pts.push_back({r, eta0 - slope * r, 0.0});
    }
    const ZeroFluxFit fit = fit_zero_flux(pts, 0.0);
    CHECK(std::abs(fit.eta0.value - eta0) / eta0 < 1e-10);
    CHECK(std::abs(fit.dead_time.value - slope) / slope < 1e-10);
}

TEST_CASE("rate rescaling leaves the intercept invariant") {
    std::vector<FluxPoint> pts, scaled;
    rng::Stream rs(5, 0x5ca1e);
    for (double r : {5e3, 2e4, 8e4, 3e5, 1e6, 2e6}) {
        const double eta = 0.55 - 1.4e-8 * r + rs.normal(0.0, 3e-4);
        pts.push_back({r, eta, 3e-4});
        scaled.push_back({r * 1000.0, eta, 3e-4});
    }
    const ZeroFluxFit a = fit_zero_flux(pts, 0.0);
    const ZeroFluxFit b = fit_zero_flux(scaled, 0.0);
    CHECK(std::abs(a.eta0.value - b.eta0.value) < 1e-10 * std::abs(a.eta0.value));
    CHECK(b.dead_time.value == doctest::Approx(a.dead_time.value / 1000.0).epsilon(1e-9));
    CHECK(a.chi2 == doctest::Approx(b.chi2).epsilon(1e-9));
}

TEST_CASE("chi2 per dof is statistically sane over many seeds") {
    int sane = 0, pulls_ok = 0;
    const double eta0 = 0.5526, slope = 1.38e-8, sigma = 5e-4;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::vector<FluxPoint> pts;
        rng::Stream rs(seed, 0xc41);
        for (int i = 0; i < 51; ++i) {
            const double r = 5e3 * std::pow(400.0, i / 50.0);
            pts.push_back({r, eta0 - slope * r + rs.normal(0.0, sigma), sigma});
        }
        const ZeroFluxFit fit = fit_zero_flux(pts, 0.0);
        const double red = fit.chi2 / fit.dof;
        if (red > 0.5 && red < 2.0) ++sane;
        if (std::abs(fit.eta0.value - eta0) < 3.0 * fit.eta0.u) ++pulls_ok;
    }
    CHECK(sane >= 95);
    CHECK(pulls_ok >= 97);
}

TEST_CASE("shared systematic part is folded into the intercept uncertainty") {
    std::vector<FluxPoint> pts;
    rng::Stream rs(3, 0xf01d);
    for (int i = 0; i < 8; ++i) {
        const double r = 1e4 * std::pow(10.0, i / 3.0);
        pts.push_back({r, 0.55 - 1.4e-8 * r + rs.normal(0.0, 4e-4), 4e-4});
    }
    const ZeroFluxFit plain = fit_zero_flux(pts, 0.0);
    const ZeroFluxFit with_sys = fit_zero_flux(pts, 5.6e-3);
    const double expected = std::hypot(plain.eta0.u, 5.6e-3 * std::abs(plain.eta0.value));
    CHECK(with_sys.eta0.u == doctest::Approx(expected).epsilon(1e-9));
    CHECK(with_sys.eta0.value == plain.eta0.value);
}

TEST_CASE("zero-flux fit input policing") {
    const FluxPoint one[] = {{1e4, 0.5, 0.0}};
    CHECK_THROWS_AS(fit_zero_flux(one, 0.0), FitError);
    const FluxPoint narrow[] = {{1e4, 0.5, 0.0}, {5e4, 0.49, 0.0}};
    CHECK_THROWS_AS(fit_zero_flux(narrow, 0.0), FitError);
    const FluxPoint mixed[] = {{1e4, 0.5, 0.0}, {2e5, 0.49, 1e-4}, {2e6, 0.46, 1e-4}};
    CHECK_THROWS_AS(fit_zero_flux(mixed, 0.0), FitError);
    const FluxPoint negative[] = {{-1.0, 0.5, 0.0}, {2e6, 0.46, 0.0}};
    CHECK_THROWS_AS(fit_zero_flux(negative, 0.0), DomainError);
}

TEST_CASE("rising efficiency yields a flagged negative dead time") {
    const FluxPoint pts[] = {{1e4, 0.50, 0.0}, {1e6, 0.52, 0.0}};
    const ZeroFluxFit fit = fit_zero_flux(pts, 0.0);
    CHECK(fit.flagged_negative_dead_time);
}

TEST_CASE("sweep fit recovers the optical thickness from noisy fringes") {
    const EtalonParams truth = sweep_window(1.0);
    const auto pts = synthetic_sweep(truth, 0.56, 3e-3, 201, 11);
    const SweepFit fit = fit_etalon_sweep(pts, sweep_window());
    const double nl_true = truth.n * truth.thickness_m;
    REQUIRE_FALSE(fit.baseline_only);
    CHECK(std::abs(fit.optical_thickness_m - nl_true) / nl_true < 1e-3);
    CHECK(fit.visibility == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.eta_base_intercept == doctest::Approx(0.56).epsilon(0.01));
    CHECK(fit.converged);
    const double red = fit.residual_chi2 / fit.dof;
    CHECK(red > 0.5);
    CHECK(red < 2.0);
}

TEST_CASE("noiseless fringes are recovered essentially exactly") {
    const EtalonParams truth = sweep_window(0.3965);
    auto pts = synthetic_sweep(truth, 0.5526, 0.0, 61, 1);
    for (auto& p : pts) p.eta = Quantity(p.eta.value, 1e-6);  // uniform weights
    const SweepFit fit = fit_etalon_sweep(pts, sweep_window());
    const double nl_true = truth.n * truth.thickness_m;
    REQUIRE_FALSE(fit.baseline_only);
    CHECK(std::abs(fit.optical_thickness_m - nl_true) / nl_true < 1e-6);
    CHECK(fit.visibility == doctest::Approx(0.3965).epsilon(1e-4));
    CHECK(fit.eta_base_intercept == doctest::Approx(0.5526).epsilon(1e-4));
}

TEST_CASE("flat data yields a baseline-only fit") {
    std::vector<SweepPoint> pts;
    rng::Stream rs(4, 0xf1a7);
    for (int i = 0; i < 40; ++i) {
        const double lambda = 849e-9 + 3e-9 * i / 39.0;
        pts.push_back({lambda, Quantity(0.55 + rs.normal(0.0, 3e-4), 3e-4)});
    }
    const SweepFit fit = fit_etalon_sweep(pts, sweep_window());
    CHECK(fit.baseline_only);
    CHECK(fit.visibility == 0.0);
    CHECK(fit.converged);
    CHECK(fit.eta_base_intercept == doctest::Approx(0.55).epsilon(1e-3));
}

TEST_CASE("sweep fit input policing") {
    const EtalonParams truth = sweep_window(1.0);
    auto pts = synthetic_sweep(truth, 0.56, 1e-3, 7, 2);
    CHECK_THROWS_AS(fit_etalon_sweep(pts, sweep_window()), FitError);
    pts = synthetic_sweep(truth, 0.56, 1e-3, 12, 2);
    std::swap(pts[3], pts[4]);
    CHECK_THROWS_AS(fit_etalon_sweep(pts, sweep_window()), FitError);
}
