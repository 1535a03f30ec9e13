#pragma once

#include "spdcal/quantity.hpp"

namespace spdcal {

/// Exact SI defining constants (zero uncertainty).
struct PhysicalConstants {
    double h = 6.62607015e-34;  // Planck constant, J*s
    double c = 299792458.0;     // speed of light in vacuum, m/s

    /// h*c as a Quantity, tagged J*m expressed in base symbols W*s*m.
    Quantity hc() const { return Quantity(h * c, 0.0, "W*s*m"); }
};

} // namespace spdcal
