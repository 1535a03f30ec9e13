#include "spdcal/analysis.hpp"

#include "spdcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace spdcal {

Quantity quantity_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("value")) {
        throw ValidationError("constant entry must be an object with value/u/unit");
    }
    return Quantity(j["value"].get<double>(), j.value("u", 0.0),
                    Unit(j.value("unit", std::string("1"))));
}

nlohmann::json quantity_to_json(const Quantity& q, double coverage_factor) {
    return {{"value", q.value},
            {"u", q.u * coverage_factor},
            {"unit", q.unit.str()},
            {"coverage_factor", coverage_factor}};
}

AnalysisConstants constants_from_json(const nlohmann::json& dataset_constants,
                                      const nlohmann::json& overrides) {
    nlohmann::json merged = dataset_constants;
    if (overrides.is_object()) {
        for (const auto& [key, val] : overrides.items()) merged[key] = val;
    }
    for (const char* key : {"s", "C", "T", "lambda", "t", "tau"}) {
        if (!merged.contains(key)) {
            throw ValidationError(std::string("missing constant '") + key + "'");
        }
    }
    AnalysisConstants c;
    c.inst.s = quantity_from_json(merged["s"]);
    c.inst.cal_c = quantity_from_json(merged["C"]);
    c.inst.lens_t = quantity_from_json(merged["T"]);
    c.inst.lambda = quantity_from_json(merged["lambda"]);
    c.inst.t = quantity_from_json(merged["t"]);
    c.tau = quantity_from_json(merged["tau"]);
    c.inst.validate();
    return c;
}

namespace {

std::vector<double> values_of(const std::vector<const RunRecord*>& runs) {
    std::vector<double> out;
    out.reserve(runs.size());
    for (const auto* r : runs) out.push_back(r->value);
    return out;
}

/// rho-corrected values and the monitor-power mean of one run group.
struct CorrectedGroup {
    Quantity corrected_mean;  // of value * <P>/P_i
    Quantity monitor_mean;    // W, u = standard error
};

CorrectedGroup correct_group(const std::vector<const RunRecord*>& runs, const Unit& unit) {
    std::vector<double> powers;
    powers.reserve(runs.size());
    for (const auto* r : runs) powers.push_back(r->monitor_power_w);
    const Quantity pmean = sample_mean(powers, Unit("W"));
    std::vector<double> corrected;
    corrected.reserve(runs.size());
    for (const auto* r : runs) {
        corrected.push_back(apply_source_correction(*r, pmean.value));
    }
    return {sample_mean(corrected, unit), pmean};
}

} // namespace

TauAnalysis analyze_tau(const Dataset& ds) {
    std::map<long long, std::map<AttenuatorSetting, std::vector<double>>> currents;
    std::map<long long, std::vector<double>> backgrounds;
    for (const auto& r : ds.runs) {
        if (r.kind == RunKind::SiphCurrent) {
            currents[ds.group_of(r)][r.setting].push_back(r.value);
        } else if (r.kind == RunKind::SiphBackground) {
            backgrounds[ds.group_of(r)].push_back(r.value);
        }
    }
    if (currents.empty()) throw ValidationError("dataset has no photodiode current runs");

    TauAnalysis out;
    std::vector<double> taus;
    for (const auto& [day, by_setting] : currents) {
        auto need = [&](AttenuatorSetting s) -> const std::vector<double>& {
            auto it = by_setting.find(s);
            if (it == by_setting.end() || it->second.size() < 2) {
                throw ValidationError("day " + std::to_string(day) +
                                      ": missing samples at setting " + to_string(s));
            }
            return it->second;
        };
        auto bg = backgrounds.find(day);
        if (bg == backgrounds.end()) {
            throw ValidationError("day " + std::to_string(day) + ": no background runs");
        }
        const Quantity a_env = sample_mean(bg->second, Unit("A"));
        const Quantity tau30 = estimate_tau_stage(need(AttenuatorSetting::A30dB),
                                                  need(AttenuatorSetting::Ref0dB), a_env);
        const Quantity tau40 = estimate_tau_stage(need(AttenuatorSetting::A40dB),
                                                  need(AttenuatorSetting::Ref0dB), a_env);
        DayTau day_est{day, compose_tau(tau30, tau40)};
        taus.push_back(day_est.est.tau.value);
        out.mean_measurement_u += day_est.est.tau.u;
        out.days.push_back(std::move(day_est));
    }
    out.mean_measurement_u /= static_cast<double>(out.days.size());
    out.tau = sample_mean(taus);
    const double n = static_cast<double>(taus.size());
    out.day_scatter_sd = out.tau.u * std::sqrt(n);  // sd = se * sqrt(n)
    return out;
}

EfficiencyAnalysis analyze_efficiency(const Dataset& ds, const AnalysisConstants& constants) {
    std::map<long long, std::vector<const RunRecord*>> dut_groups, siph_groups;
    std::vector<const RunRecord*> dut_bg, siph_bg;
    for (const auto& r : ds.runs) {
        switch (r.kind) {
            case RunKind::DutCounts: dut_groups[ds.group_of(r)].push_back(&r); break;
            case RunKind::SiphCurrent: siph_groups[ds.group_of(r)].push_back(&r); break;
            case RunKind::DutBackground: dut_bg.push_back(&r); break;
            case RunKind::SiphBackground: siph_bg.push_back(&r); break;
        }
    }
    if (dut_groups.empty()) throw ValidationError("dataset has no DUT count runs");
    if (dut_bg.empty() || siph_bg.empty()) {
        throw ValidationError("dataset has no background runs");
    }

    const Quantity n_env = sample_mean(values_of(dut_bg), Unit("1"));
    const Quantity a_env = sample_mean(values_of(siph_bg), Unit("A"));

    EfficiencyAnalysis out;
    out.constants = constants;
    for (const auto& [group, dut_runs] : dut_groups) {
        auto siph_it = siph_groups.find(group);
        if (siph_it == siph_groups.end()) {
            throw ValidationError("group " + std::to_string(group) +
                                  " has DUT runs but no photodiode runs");
        }
        const CorrectedGroup dut = correct_group(dut_runs, Unit("1"));
        const CorrectedGroup siph = correct_group(siph_it->second, Unit("A"));

        PointAnalysis pa;
        pa.group = group;
        pa.lambda_m = dut_runs.front()->wavelength_m;
        pa.eps = epsilon_factor(dut.monitor_mean, siph.monitor_mean);

        pa.inputs.n_prime = dut.corrected_mean;
        pa.inputs.n_env = n_env;
        pa.inputs.a_prime = siph.corrected_mean;
        pa.inputs.a_env = a_env;
        pa.inputs.tau = constants.tau;
        pa.inputs.eps = pa.eps;
        pa.inputs.inst = constants.inst;
        pa.inputs.inst.lambda =
            Quantity(pa.lambda_m, constants.inst.lambda.u, Unit("m"));
        pa.inputs.inst.t = Quantity(dut_runs.front()->duration_s,
                                    constants.inst.t.u, Unit("s"));

        pa.point = efficiency_point(pa.inputs);
        pa.u_stat =
            std::abs(pa.point.eta.value) * std::sqrt(statistical_rel_variance(pa.inputs));
        pa.sys_rel = std::sqrt(systematic_rel_variance(pa.inputs));
        out.points.push_back(std::move(pa));
    }
    return out;
}

ZeroFluxAnalysis analyze_zero_flux(const Dataset& ds, const AnalysisConstants& constants) {
    ZeroFluxAnalysis out;
    out.efficiency = analyze_efficiency(ds, constants);

    std::vector<FluxPoint> pts;
    double sys_rel = 0.0;
    for (const auto& pa : out.efficiency.points) {
        pts.push_back({pa.point.rate, pa.point.eta.value, pa.u_stat});
        sys_rel += pa.sys_rel;
    }
    sys_rel /= static_cast<double>(out.efficiency.points.size());
    std::sort(pts.begin(), pts.end(),
              [](const FluxPoint& a, const FluxPoint& b) { return a.rate < b.rate; });
    out.fit = fit_zero_flux(pts, sys_rel);
    return out;
}

SweepAnalysis analyze_sweep(const Dataset& ds, const AnalysisConstants& constants,
                            const EtalonParams& window_guess) {
    SweepAnalysis out;
    out.efficiency = analyze_efficiency(ds, constants);

    std::vector<SweepPoint> pts;
    for (const auto& pa : out.efficiency.points) {
        pts.push_back({pa.lambda_m, Quantity(pa.point.eta.value, pa.u_stat)});
    }
    std::sort(pts.begin(), pts.end(), [](const SweepPoint& a, const SweepPoint& b) {
        return a.lambda_m < b.lambda_m;
    });
    out.fit = fit_etalon_sweep(pts, window_guess);
    return out;
}

} // namespace spdcal
