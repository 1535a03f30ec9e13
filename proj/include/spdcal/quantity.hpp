#pragma once

#include "spdcal/units.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace spdcal {

/// A measured value with its standard (K=1) uncertainty and unit tag.
struct Quantity {
    double value = 0.0;
    double u = 0.0;
    Unit unit{};

    Quantity() = default;
    Quantity(double value, double u, Unit unit = Unit{});
    Quantity(double value, double u, const std::string& unit);

    /// |u / value|; the value must be nonzero.
    double rel_u() const;

    /// Same value/unit, uncertainty scaled by a coverage factor k.
    Quantity expanded(double k) const;
};

std::ostream& operator<<(std::ostream& os, const Quantity& q);

/// One term of a pure product/quotient model: q^exponent.
struct PowerFactor {
    Quantity q;
    int exponent = 1;
};

/// First-order propagation through y = prod_i x_i^k_i for uncorrelated
/// inputs: relative variance of y is sum_i k_i^2 (u_i/x_i)^2.
Quantity propagate_power_product(std::span<const PowerFactor> factors);
Quantity propagate_power_product(std::initializer_list<PowerFactor> factors);

/// a + sign*b with quadrature-summed uncertainty; units must match.
Quantity propagate_sum(const Quantity& a, const Quantity& b, int sign);

/// Arithmetic mean of samples with Type A uncertainty sd/sqrt(n).
Quantity sample_mean(std::span<const double> samples, const Unit& unit = Unit{});

} // namespace spdcal
