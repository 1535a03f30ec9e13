#pragma once

#include "spdcal/constants.hpp"
#include "spdcal/quantity.hpp"

#include <span>
#include <string>
#include <vector>

namespace spdcal {

enum class RunKind { DutCounts, SiphCurrent, DutBackground, SiphBackground };

enum class AttenuatorSetting { Ref0dB, A30dB, A40dB, A70dB };

std::string to_string(RunKind k);
std::string to_string(AttenuatorSetting s);
RunKind run_kind_from_string(const std::string& s);
AttenuatorSetting attenuator_from_string(const std::string& s);

/// One raw acquisition: SPAD counts or photodiode current together with
/// the monitor-power sample taken during the run.
struct RunRecord {
    long long run_id = 0;
    RunKind kind = RunKind::DutCounts;
    double value = 0.0;            // counts or A depending on kind
    double monitor_power_w = 0.0;  // 0 allowed for background runs
    double duration_s = 1.0;
    double wavelength_m = 850.711e-9;
    AttenuatorSetting setting = AttenuatorSetting::Ref0dB;

    void validate() const;  // throws ValidationError naming the field
};

/// Dark/background level of the two detection channels.
struct Background {
    Quantity n_env;  // counts per acquisition window
    Quantity a_env;  // dark current, A

    void validate() const;
};

/// Fixed calibration constants of the apparatus.
///
/// s is the photodiode responsivity in A/W: the reference-channel source
/// power is C*dA/s, which is what makes the efficiency model dimensionless
/// and the published value-and-budget pair self-consistent.
struct InstrumentConstants {
    Quantity s;       // A/W
    Quantity cal_c;   // picoammeter calibration factor, dimensionless
    Quantity lens_t;  // lens transmissivity, dimensionless
    Quantity lambda;  // m
    Quantity t;       // acquisition time, s

    void validate() const;
};

/// Per-stage and composed attenuation-chain transmissivity.
struct AttenuationEstimate {
    Quantity tau_30;
    Quantity tau_40;
    Quantity tau;  // tau_30 * tau_40 with product propagation
};

/// Source-fluctuation corrections: per-run ratios <P>/P_i and the
/// phase-imbalance factor <P_dut>/<P_siph>.
struct CorrectionFactors {
    std::vector<double> rho_per_run;
    Quantity epsilon;
};

/// One point of the efficiency-versus-rate curve.
struct EfficiencyPoint {
    double rate = 0.0;  // corrected background-subtracted counts/s
    Quantity eta;
    bool flagged = false;  // eta outside [0, 1.2] is rejected; (1, 1.2] flagged
};

/// Everything the substitution model consumes for one measurement point.
struct EfficiencyInputs {
    Quantity n_prime;  // corrected counts, rho only
    Quantity n_env;
    Quantity a_prime;  // corrected current, rho only (epsilon kept separate)
    Quantity a_env;
    Quantity tau;
    Quantity eps;
    InstrumentConstants inst;
    PhysicalConstants consts;
};

/// One row of the uncertainty budget.
struct BudgetRow {
    std::string name;
    double value = 0.0;
    double u = 0.0;
    std::string unit;
    double percent = 0.0;  // share of the total relative variance, in %
};

/// value * rho_i with rho_i = mean_monitor_power / record.monitor_power.
double apply_source_correction(const RunRecord& record, double mean_monitor_power_w);

/// epsilon = <P_dut>/<P_siph> with quotient propagation; the input
/// uncertainties are the standard errors of the monitor samples.
Quantity epsilon_factor(const Quantity& mean_p_dut, const Quantity& mean_p_siph);

/// tau_x = (mean(a_x) - a_env)/(mean(a_0) - a_env). Standard errors of the
/// two sample means and u(a_env) propagate through the difference/quotient.
Quantity estimate_tau_stage(std::span<const double> a_x,
                            std::span<const double> a_0,
                            const Quantity& a_env);

AttenuationEstimate compose_tau(const Quantity& tau_30, const Quantity& tau_40);

/// eta = hc/(lambda t) * s (N' - N_env) / (tau C eps (A' - A_env) T),
/// with uncertainty from the power-product engine over all factors.
EfficiencyPoint efficiency_point(const EfficiencyInputs& in);

/// Budget rows in published order (N', N_env, A', A_env, tau, eps, s, C,
/// T, lambda, t). Percentages are relative-variance shares and sum to
/// 100% within rounding; the background rows contribute through the
/// subtracted differences.
std::vector<BudgetRow> uncertainty_budget(const EfficiencyInputs& in);

/// Relative variance of eta due to the counting/current channels only
/// (N', N_env, A', A_env) - the per-point statistical part.
double statistical_rel_variance(const EfficiencyInputs& in);

/// Relative variance of eta due to the shared scale factors
/// (s, tau, eps, C, T, lambda, t).
double systematic_rel_variance(const EfficiencyInputs& in);

} // namespace spdcal
