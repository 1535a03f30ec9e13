#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spdcal::rng {

/// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

/// Stateless counter hash over a 4-word key. Output is a uniform 64-bit
/// word; identical inputs give identical outputs on every platform, so
/// substreams keyed on (seed, stream, index) are scheduling-independent.
constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    h = mix64(h ^ a);
    h = mix64(h + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2) + b);
    h = mix64(h + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2) + c);
    h = mix64(h + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2) + d);
    return h;
}

/// Map a 64-bit word to (0,1); never returns exactly 0 or 1.
inline double to_unit_open(std::uint64_t x) {
    double v = static_cast<double>(x >> 11) * 0x1.0p-53;
    if (v <= 0.0) v = 0x1.0p-53;
    return v;
}

/// One standard normal deviate from a keyed counter (Box-Muller).
inline double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const double u1 = to_unit_open(hash(seed, stream, index, 0x6e6f726d31ULL));
    const double u2 = to_unit_open(hash(seed, stream, index, 0x6e6f726d32ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential deterministic stream derived from a 3-word key.
class Stream {
public:
    explicit Stream(std::uint64_t k0, std::uint64_t k1 = 0, std::uint64_t k2 = 0)
        : k0_(k0), k1_(k1), k2_(k2) {}

    std::uint64_t next_u64() { return hash(k0_, k1_, k2_, ctr_++); }

    double uniform() { return to_unit_open(next_u64()); }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Poisson deviate. Inversion by uniform products below mean 50,
    /// rounded normal approximation above (error negligible there).
    long long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 50.0) {
            const double limit = std::exp(-mean);
            long long k = -1;
            double prod = 1.0;
            do {
                ++k;
                prod *= uniform();
            } while (prod > limit);
            return k;
        }
        const double x = std::llround(normal(mean, std::sqrt(mean)));
        return x < 0.0 ? 0 : static_cast<long long>(x);
    }

private:
    std::uint64_t k0_, k1_, k2_;
    std::uint64_t ctr_ = 0;
};

} // namespace spdcal::rng
