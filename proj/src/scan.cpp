#include "spdcal/scan.hpp"

#include "spdcal/errors.hpp"

#include <algorithm>
#include <cmath>

namespace spdcal {

FlatRegion find_flat_region(const ScanMap& map, double window_size_m) {
    if (map.nx <= 0 || map.ny <= 0) throw DomainError("empty scan map");
    const int win = std::max(1, static_cast<int>(std::lround(window_size_m / map.step_m)));
    if (win > map.nx || win > map.ny) {
        throw DomainError("window does not fit inside the scanned extent");
    }

    const double global_max = *std::max_element(map.counts.begin(), map.counts.end());
    if (!(global_max > 0.0)) throw DomainError("no plateau: scan map is empty or all zero");
    std::vector<double> plateau;
    for (double c : map.counts) {
        if (c > 0.5 * global_max) plateau.push_back(c);
    }
    std::sort(plateau.begin(), plateau.end());
    const double plateau_median = plateau[plateau.size() / 2];

    const double cx = map.origin_x_m + 0.5 * (map.nx - 1) * map.step_m;
    const double cy = map.origin_y_m + 0.5 * (map.ny - 1) * map.step_m;

    bool found = false;
    FlatRegion best;
    double best_center_dist = 0.0;
    for (int iy = 0; iy + win <= map.ny; ++iy) {
        for (int ix = 0; ix + win <= map.nx; ++ix) {
            double sum = 0.0, sum2 = 0.0;
            for (int dy = 0; dy < win; ++dy) {
                for (int dx = 0; dx < win; ++dx) {
                    const double v = map.at(ix + dx, iy + dy);
                    sum += v;
                    sum2 += v * v;
                }
            }
            const double n = static_cast<double>(win) * win;
            const double mean = sum / n;
            if (!(mean > 0.5 * plateau_median)) continue;
            const double var = std::max(0.0, sum2 / n - mean * mean);
            const double score = std::sqrt(var) / mean;
            const double wx = map.x_of(ix) + 0.5 * (win - 1) * map.step_m;
            const double wy = map.y_of(iy) + 0.5 * (win - 1) * map.step_m;
            const double dist = std::hypot(wx - cx, wy - cy);
            const bool better =
                !found || score < best.flatness ||
                (score == best.flatness && dist < best_center_dist);
            if (better) {
                best = {wx, wy, score};
                best_center_dist = dist;
                found = true;
            }
        }
    }
    if (!found) throw DomainError("no plateau: no window exceeds the plateau threshold");
    return best;
}

} // namespace spdcal
