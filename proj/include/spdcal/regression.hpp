#pragma once

#include "spdcal/etalon.hpp"
#include "spdcal/quantity.hpp"

#include <array>
#include <span>
#include <vector>

namespace spdcal {

/// One efficiency measurement entering the zero-flux extrapolation.
/// u_stat is the per-point statistical uncertainty used as weight.
struct FluxPoint {
    double rate = 0.0;  // background-subtracted counts/s
    double eta = 0.0;
    double u_stat = 0.0;
};

/// Result of the weighted linear extrapolation eta(R) = eta0 - D R.
struct ZeroFluxFit {
    Quantity eta0;       // u combines fit covariance and the shared scale part
    Quantity dead_time;  // s; -slope of the fit, u from the covariance
    std::array<std::array<double, 2>, 2> covariance{};  // (intercept, slope)
    double chi2 = 0.0;
    int dof = 0;
    bool flagged_negative_dead_time = false;
};

/// Weighted least squares of eta against rate with weights 1/u_stat^2.
/// The fitted intercept uncertainty uses statistical weights only;
/// shared_systematic_rel (relative uncertainty of the common efficiency
/// scale, from s, tau, eps, C, T, lambda, t) is then added in quadrature.
ZeroFluxFit fit_zero_flux(std::span<const FluxPoint> points,
                          double shared_systematic_rel);

/// One point of the wavelength sweep.
struct SweepPoint {
    double lambda_m = 0.0;
    Quantity eta;
};

/// Result of fitting eta(lambda) = (a + b (lambda - lambda_ref)) *
/// (1 - V |Gamma(lambda, n, L)|^2) with n fixed.
struct SweepFit {
    double optical_thickness_m = 0.0;  // n*L
    double visibility = 0.0;
    double eta_base_intercept = 0.0;  // baseline at lambda_ref
    double eta_base_slope = 0.0;      // per m
    double lambda_ref_m = 0.0;
    int ambiguity_class = 0;  // fringe-frequency aliasing order of the grid
    double residual_chi2 = 0.0;
    int dof = 0;
    bool converged = false;
    bool baseline_only = false;  // no resolvable fringe; V forced to 0
};

/// Nonlinear fit of the fringe model over (n*L, V, a, b). n*L is seeded
/// by a periodogram of the detrended residuals and refined with damped
/// (Levenberg-Marquardt style) iterations until |dchi2| < 1e-9 relative
/// or 200 iterations. Flat data yields a flagged baseline-only fit.
SweepFit fit_etalon_sweep(std::span<const SweepPoint> points,
                          const EtalonParams& window_guess);

} // namespace spdcal
