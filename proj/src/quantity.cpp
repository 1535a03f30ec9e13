#include "spdcal/quantity.hpp"

#include "spdcal/errors.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace spdcal {

Quantity::Quantity(double value, double u, Unit unit)
    : value(value), u(u), unit(std::move(unit)) {
    if (!std::isfinite(value) || !std::isfinite(u)) {
        throw DomainError("quantity value and uncertainty must be finite");
    }
    if (u < 0.0) throw DomainError("quantity uncertainty must be >= 0");
}

Quantity::Quantity(double value, double u, const std::string& unit)
    : Quantity(value, u, Unit(unit)) {}

double Quantity::rel_u() const {
    if (value == 0.0) throw DomainError("relative uncertainty undefined for zero value");
    return std::abs(u / value);
}

Quantity Quantity::expanded(double k) const {
    if (k <= 0.0) throw DomainError("coverage factor must be > 0");
    return Quantity(value, u * k, unit);
}

std::ostream& operator<<(std::ostream& os, const Quantity& q) {
    return os << q.value << " +- " << q.u << " " << q.unit.str();
}

Quantity propagate_power_product(std::span<const PowerFactor> factors) {
    if (factors.empty()) throw DomainError("product model needs at least one factor");
    double value = 1.0;
    double rel_var = 0.0;
    Unit unit;
    for (const auto& [q, k] : factors) {
        if (k == 0) throw DomainError("product model exponents must be nonzero");
        if (q.value == 0.0) throw DomainError("zero-valued factor in product model");
        value *= std::pow(q.value, k);
        rel_var += static_cast<double>(k) * k * q.rel_u() * q.rel_u();
        unit = unit * q.unit.pow(k);
    }
    if (!std::isfinite(value)) throw DomainError("product model overflowed");
    return Quantity(value, std::abs(value) * std::sqrt(rel_var), unit);
}

Quantity propagate_power_product(std::initializer_list<PowerFactor> factors) {
    return propagate_power_product(std::span<const PowerFactor>(factors.begin(), factors.size()));
}

Quantity propagate_sum(const Quantity& a, const Quantity& b, int sign) {
    if (sign != 1 && sign != -1) throw DomainError("sum sign must be +1 or -1");
    if (!(a.unit == b.unit)) {
        throw UnitError("unit mismatch in sum: '" + a.unit.str() + "' vs '" + b.unit.str() + "'");
    }
    return Quantity(a.value + sign * b.value, std::hypot(a.u, b.u), a.unit);
}

Quantity sample_mean(std::span<const double> samples, const Unit& unit) {
    if (samples.empty()) throw DomainError("sample mean of empty set");
    // identical samples (e.g. from a noiseless simulation) have exactly
    // zero scatter; keep that exact instead of accumulating roundoff
    bool all_equal = true;
    for (double x : samples) all_equal = all_equal && x == samples.front();
    if (all_equal) return Quantity(samples.front(), 0.0, unit);
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double se = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return Quantity(mean, se, unit);
}

} // namespace spdcal
