#pragma once

#include "spdcal/dataset.hpp"

namespace spdcal {

struct FlatRegion {
    double x_m = 0.0;  // window center
    double y_m = 0.0;
    double flatness = 0.0;  // local sd / local mean, lower is flatter
};

/// Slide a square window of the given size over the map and return the
/// center of the flattest one (local sd / local mean) among windows whose
/// mean exceeds 50% of the plateau median (median of pixels above half
/// the global maximum). Ties go to the window closest to the map center.
FlatRegion find_flat_region(const ScanMap& map, double window_size_m);

} // namespace spdcal
