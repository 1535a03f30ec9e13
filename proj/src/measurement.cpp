#include "spdcal/measurement.hpp"

#include "spdcal/errors.hpp"

#include <cmath>

namespace spdcal {

std::string to_string(RunKind k) {
    switch (k) {
        case RunKind::DutCounts: return "dut_counts";
        case RunKind::SiphCurrent: return "siph_current";
        case RunKind::DutBackground: return "dut_background";
        case RunKind::SiphBackground: return "siph_background";
    }
    throw ValidationError("unknown run kind");
}

std::string to_string(AttenuatorSetting s) {
    switch (s) {
        case AttenuatorSetting::Ref0dB: return "REF_0dB";
        case AttenuatorSetting::A30dB: return "A_30dB";
        case AttenuatorSetting::A40dB: return "A_40dB";
        case AttenuatorSetting::A70dB: return "A_70dB";
    }
    throw ValidationError("unknown attenuator setting");
}

RunKind run_kind_from_string(const std::string& s) {
    if (s == "dut_counts") return RunKind::DutCounts;
    if (s == "siph_current") return RunKind::SiphCurrent;
    if (s == "dut_background") return RunKind::DutBackground;
    if (s == "siph_background") return RunKind::SiphBackground;
    throw ValidationError("unknown run kind '" + s + "'");
}

AttenuatorSetting attenuator_from_string(const std::string& s) {
    if (s == "REF_0dB") return AttenuatorSetting::Ref0dB;
    if (s == "A_30dB") return AttenuatorSetting::A30dB;
    if (s == "A_40dB") return AttenuatorSetting::A40dB;
    if (s == "A_70dB") return AttenuatorSetting::A70dB;
    throw ValidationError("unknown attenuator setting '" + s + "'");
}

void RunRecord::validate() const {
    const std::string id = "run " + std::to_string(run_id) + ": ";
    if (!(duration_s > 0.0)) throw ValidationError(id + "duration must be > 0");
    const bool counts_kind = kind == RunKind::DutCounts || kind == RunKind::DutBackground;
    if (counts_kind && value < 0.0) throw ValidationError(id + "counts must be >= 0");
    const bool background = kind == RunKind::DutBackground || kind == RunKind::SiphBackground;
    if (!background && !(monitor_power_w > 0.0)) {
        throw ValidationError(id + "monitor power must be > 0 for non-background runs");
    }
    if (!(wavelength_m > 0.0)) throw ValidationError(id + "wavelength must be > 0");
}

void Background::validate() const {
    if (n_env.value < 0.0) throw ValidationError("background counts must be >= 0");
    if (a_env.value < 0.0) throw ValidationError("dark current must be >= 0");
}

void InstrumentConstants::validate() const {
    if (!(s.value > 0.0)) throw ValidationError("sensitivity s must be > 0");
    if (!(cal_c.value > 0.0)) throw ValidationError("calibration factor C must be > 0");
    if (!(lens_t.value > 0.0 && lens_t.value <= 1.0)) {
        throw ValidationError("lens transmissivity T must be in (0,1]");
    }
    if (lambda.value < 300e-9 || lambda.value > 1100e-9) {
        throw ValidationError("wavelength must be in [300 nm, 1100 nm]");
    }
    if (!(t.value > 0.0)) throw ValidationError("acquisition time must be > 0");
}

double apply_source_correction(const RunRecord& record, double mean_monitor_power_w) {
    if (!(record.monitor_power_w > 0.0) || !(mean_monitor_power_w > 0.0)) {
        throw DomainError("monitor power must be > 0 for source correction");
    }
    return record.value * (mean_monitor_power_w / record.monitor_power_w);
}

Quantity epsilon_factor(const Quantity& mean_p_dut, const Quantity& mean_p_siph) {
    if (!(mean_p_dut.value > 0.0) || !(mean_p_siph.value > 0.0)) {
        throw DomainError("monitor power means must be > 0");
    }
    return propagate_power_product({{mean_p_dut, 1}, {mean_p_siph, -1}});
}

Quantity estimate_tau_stage(std::span<const double> a_x,
                            std::span<const double> a_0,
                            const Quantity& a_env) {
    if (a_x.size() < 2 || a_0.size() < 2) {
        throw DomainError("tau stage needs at least 2 samples per group");
    }
    const Quantity mean_x = sample_mean(a_x, a_env.unit);
    const Quantity mean_0 = sample_mean(a_0, a_env.unit);
    const Quantity num = propagate_sum(mean_x, a_env, -1);
    const Quantity den = propagate_sum(mean_0, a_env, -1);
    if (!(den.value > 0.0)) {
        throw DomainError("degenerate signal: reference current does not exceed background");
    }
    return propagate_power_product({{num, 1}, {den, -1}});
}

AttenuationEstimate compose_tau(const Quantity& tau_30, const Quantity& tau_40) {
    for (const auto* q : {&tau_30, &tau_40}) {
        if (!(q->value > 0.0 && q->value < 1.0)) {
            throw DomainError("stage transmissivity must be in (0,1)");
        }
    }
    AttenuationEstimate est;
    est.tau_30 = tau_30;
    est.tau_40 = tau_40;
    est.tau = propagate_power_product({{tau_30, 1}, {tau_40, 1}});
    return est;
}

namespace {

struct Differences {
    Quantity dn;  // N' - N_env
    Quantity da;  // A' - A_env
};

Differences subtract_backgrounds(const EfficiencyInputs& in) {
    Differences d;
    d.dn = propagate_sum(in.n_prime, in.n_env, -1);
    d.da = propagate_sum(in.a_prime, in.a_env, -1);
    if (!(d.dn.value > 0.0)) throw DomainError("count signal below background");
    if (!(d.da.value > 0.0)) throw DomainError("current signal below background");
    return d;
}

} // namespace

EfficiencyPoint efficiency_point(const EfficiencyInputs& in) {
    in.inst.validate();
    const Differences d = subtract_backgrounds(in);
    const Quantity eta = propagate_power_product({
        {in.consts.hc(), 1},
        {d.dn, 1},
        {in.inst.s, 1},
        {in.inst.lambda, -1},
        {in.inst.t, -1},
        {in.tau, -1},
        {in.inst.cal_c, -1},
        {in.eps, -1},
        {d.da, -1},
        {in.inst.lens_t, -1},
    });
    if (!eta.unit.is_dimensionless()) {
        throw UnitError("efficiency came out non-dimensionless: " + eta.unit.str());
    }
    EfficiencyPoint pt;
    pt.rate = d.dn.value / in.inst.t.value;
    pt.eta = eta;
    pt.flagged = eta.value > 1.0;  // misconfigured tau is surfaced, not rejected
    return pt;
}

std::vector<BudgetRow> uncertainty_budget(const EfficiencyInputs& in) {
    in.inst.validate();
    const Differences d = subtract_backgrounds(in);

    auto rel2 = [](double u, double base) { return (u / base) * (u / base); };

    std::vector<BudgetRow> rows{
        {"N'", in.n_prime.value, in.n_prime.u, "1", rel2(in.n_prime.u, d.dn.value)},
        {"N_env", in.n_env.value, in.n_env.u, "1", rel2(in.n_env.u, d.dn.value)},
        {"A'", in.a_prime.value, in.a_prime.u, "A", rel2(in.a_prime.u, d.da.value)},
        {"A_env", in.a_env.value, in.a_env.u, "A", rel2(in.a_env.u, d.da.value)},
        {"tau", in.tau.value, in.tau.u, "1", rel2(in.tau.u, in.tau.value)},
        {"eps", in.eps.value, in.eps.u, "1", rel2(in.eps.u, in.eps.value)},
        {"s", in.inst.s.value, in.inst.s.u, in.inst.s.unit.str(),
         rel2(in.inst.s.u, in.inst.s.value)},
        {"C", in.inst.cal_c.value, in.inst.cal_c.u, "1",
         rel2(in.inst.cal_c.u, in.inst.cal_c.value)},
        {"T", in.inst.lens_t.value, in.inst.lens_t.u, "1",
         rel2(in.inst.lens_t.u, in.inst.lens_t.value)},
        {"lambda", in.inst.lambda.value, in.inst.lambda.u, "m",
         rel2(in.inst.lambda.u, in.inst.lambda.value)},
        {"t", in.inst.t.value, in.inst.t.u, "s", rel2(in.inst.t.u, in.inst.t.value)},
    };

    double total = 0.0;
    for (const auto& r : rows) total += r.percent;
    if (total <= 0.0) throw DomainError("all budget inputs are exact; no budget to report");
    for (auto& r : rows) r.percent = r.percent / total * 100.0;
    return rows;
}

double statistical_rel_variance(const EfficiencyInputs& in) {
    const Differences d = subtract_backgrounds(in);
    auto rel2 = [](double u, double base) { return (u / base) * (u / base); };
    return rel2(in.n_prime.u, d.dn.value) + rel2(in.n_env.u, d.dn.value) +
           rel2(in.a_prime.u, d.da.value) + rel2(in.a_env.u, d.da.value);
}

double systematic_rel_variance(const EfficiencyInputs& in) {
    auto rel2 = [](const Quantity& q) { return q.rel_u() * q.rel_u(); };
    return rel2(in.inst.s) + rel2(in.tau) + rel2(in.eps) + rel2(in.inst.cal_c) +
           rel2(in.inst.lens_t) + rel2(in.inst.lambda) + rel2(in.inst.t);
}

} // namespace spdcal
