#pragma once

#include "spdcal/dataset.hpp"
#include "spdcal/measurement.hpp"
#include "spdcal/regression.hpp"

#include <vector>

namespace spdcal {

/// Calibration constants an analysis runs with: the instrument block plus
/// the attenuation-chain transmissivity.
struct AnalysisConstants {
    InstrumentConstants inst;
    Quantity tau;
};

Quantity quantity_from_json(const nlohmann::json& j);
nlohmann::json quantity_to_json(const Quantity& q, double coverage_factor = 1.0);

/// Constants from a dataset header, optionally overridden entry-by-entry
/// by a config file's "constants" block.
AnalysisConstants constants_from_json(const nlohmann::json& dataset_constants,
                                      const nlohmann::json& overrides);

/// Per-day attenuation estimate from a tau-characterization dataset.
struct DayTau {
    long long day = 0;
    AttenuationEstimate est;
};

struct TauAnalysis {
    std::vector<DayTau> days;
    Quantity tau;            // mean over days, u = day scatter / sqrt(n)
    double day_scatter_sd = 0.0;   // sd of the per-day composed estimates
    double mean_measurement_u = 0.0;  // mean per-day propagated uncertainty
};

TauAnalysis analyze_tau(const Dataset& ds);

/// One analyzed flux/wavelength group.
struct PointAnalysis {
    long long group = 0;
    double lambda_m = 0.0;
    EfficiencyPoint point;   // eta carries the full combined uncertainty
    double u_stat = 0.0;     // counting/current channels only
    double sys_rel = 0.0;    // shared-scale relative uncertainty
    Quantity eps;
    EfficiencyInputs inputs;
};

struct EfficiencyAnalysis {
    std::vector<PointAnalysis> points;  // ordered by group id
    AnalysisConstants constants;
};

EfficiencyAnalysis analyze_efficiency(const Dataset& ds, const AnalysisConstants& constants);

struct ZeroFluxAnalysis {
    EfficiencyAnalysis efficiency;
    ZeroFluxFit fit;
};

/// Efficiency points fitted against measured rate with statistical-only
/// weights; the shared scale uncertainty is folded into u(eta0).
ZeroFluxAnalysis analyze_zero_flux(const Dataset& ds, const AnalysisConstants& constants);

struct SweepAnalysis {
    EfficiencyAnalysis efficiency;
    SweepFit fit;
};

SweepAnalysis analyze_sweep(const Dataset& ds, const AnalysisConstants& constants,
                            const EtalonParams& window_guess);

} // namespace spdcal
