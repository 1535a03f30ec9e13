#include "spdcal/errors.hpp"
#include "spdcal/scan.hpp"
#include "spdcal/simulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace spdcal;

TEST_CASE("uniform disk resolves to the map center by tie-break") {
    sim::Config cfg = sim::Config{}.noiseless();
    cfg.detector.area_dips.clear();
    const ScanMap map = sim::simulate_area_scan(cfg, {}, 1);
    const FlatRegion r = find_flat_region(map, 50e-6);
    CHECK(std::abs(r.x_m) < 1.5 * map.step_m);
    CHECK(std::abs(r.y_m) < 1.5 * map.step_m);
    CHECK(r.flatness < 1e-6);
}

TEST_CASE("flat window avoids the default dips") {
    sim::Config cfg;
    cfg.detector.area_dips = sim::default_area_dips();
    const ScanMap map = sim::simulate_area_scan(cfg, {}, 4);
    const double window = 50e-6;
    const FlatRegion r = find_flat_region(map, window);
    for (const auto& dip : cfg.detector.area_dips) {
        // no dip center may fall inside the returned window
        CHECK((std::abs(dip.x_m - r.x_m) > window / 2.0 ||
               std::abs(dip.y_m - r.y_m) > window / 2.0));
    }
    // and the window must sit on the plateau, not on the rim
    const int ix = static_cast<int>(std::lround((r.x_m - map.origin_x_m) / map.step_m));
    const int iy = static_cast<int>(std::lround((r.y_m - map.origin_y_m) / map.step_m));
    const double global_max = *std::max_element(map.counts.begin(), map.counts.end());
    CHECK(map.at(ix, iy) > 0.5 * global_max);
}

TEST_CASE("degenerate maps are rejected") {
    ScanMap zeros;
    zeros.nx = zeros.ny = 11;
    zeros.step_m = 10e-6;
    zeros.origin_x_m = zeros.origin_y_m = -50e-6;
    zeros.counts.assign(121, 0.0);
    CHECK_THROWS_WITH_AS(find_flat_region(zeros, 30e-6), doctest::Contains("no plateau"),
                         DomainError);

    zeros.counts.assign(121, 5.0);
    CHECK_THROWS_AS(find_flat_region(zeros, 1.0), DomainError);  // window too big
}
