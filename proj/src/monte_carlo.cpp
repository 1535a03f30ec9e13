#include "spdcal/monte_carlo.hpp"

#include "spdcal/errors.hpp"
#include "spdcal/rng.hpp"

#include <cmath>

namespace spdcal {

namespace {
constexpr int kHistBins = 64;
}

MCResult monte_carlo_propagate(const MCModel& model,
                               std::span<const Quantity> inputs,
                               long long n_samples,
                               std::uint64_t seed) {
    if (n_samples < 1000) throw DomainError("monte carlo needs n_samples >= 1000");
    if (inputs.empty()) throw DomainError("monte carlo needs at least one input");

    std::vector<double> draw(inputs.size());
    std::vector<double> accepted;
    accepted.reserve(static_cast<std::size_t>(n_samples));
    long long rejected = 0;

    for (long long i = 0; i < n_samples; ++i) {
        for (std::size_t j = 0; j < inputs.size(); ++j) {
            draw[j] = inputs[j].value +
                      inputs[j].u * rng::normal_at(seed, static_cast<std::uint64_t>(j),
                                                   static_cast<std::uint64_t>(i));
        }
        double y;
        try {
            y = model(draw);
        } catch (const std::exception&) {
            ++rejected;
            continue;
        }
        if (!std::isfinite(y)) {
            ++rejected;
            continue;
        }
        accepted.push_back(y);
    }

    if (rejected * 100 > n_samples) {
        throw DomainError("monte carlo rejected more than 1% of samples (" +
                          std::to_string(rejected) + " of " + std::to_string(n_samples) + ")");
    }

    MCResult res;
    res.n_samples = static_cast<long long>(accepted.size());
    res.n_rejected = rejected;

    double sum = 0.0;
    for (double y : accepted) sum += y;
    res.mean = sum / static_cast<double>(accepted.size());

    double ss = 0.0;
    double lo = accepted.front(), hi = accepted.front();
    for (double y : accepted) {
        ss += (y - res.mean) * (y - res.mean);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    res.u = accepted.size() > 1
                ? std::sqrt(ss / static_cast<double>(accepted.size() - 1))
                : 0.0;

    res.hist_min = lo;
    res.hist_max = hi;
    res.histogram.assign(kHistBins, 0);
    const double width = hi - lo;
    for (double y : accepted) {
        int bin = width > 0.0
                      ? static_cast<int>((y - lo) / width * kHistBins)
                      : 0;
        if (bin >= kHistBins) bin = kHistBins - 1;
        ++res.histogram[static_cast<std::size_t>(bin)];
    }
    return res;
}

} // namespace spdcal
