#pragma once

#include "spdcal/quantity.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace spdcal {

/// Monte-Carlo propagation summary.
struct MCResult {
    double mean = 0.0;
    double u = 0.0;  // sample standard deviation
    long long n_samples = 0;
    long long n_rejected = 0;
    // histogram of accepted samples over [hist_min, hist_max]
    double hist_min = 0.0;
    double hist_max = 0.0;
    std::vector<long long> histogram;
};

using MCModel = std::function<double(std::span<const double>)>;

/// Samples each input from N(value, u), evaluates the model and returns
/// the sample mean and standard deviation. Input j of sample i is drawn
/// from the counter (seed, j, i), so the result is independent of
/// evaluation order. Samples on which the model throws or returns a
/// non-finite value are rejected; more than 1% rejections is an error.
MCResult monte_carlo_propagate(const MCModel& model,
                               std::span<const Quantity> inputs,
                               long long n_samples,
                               std::uint64_t seed);

} // namespace spdcal
