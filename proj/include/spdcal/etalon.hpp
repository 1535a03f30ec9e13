#pragma once

#include <complex>

namespace spdcal {

/// Optical parameters of the plane-parallel window in front of the
/// detector's active area.
struct EtalonParams {
    double n = 1.4525;       // window refractive index (fused quartz near 850 nm)
    double n_a = 1.00027;    // ambient (air) refractive index
    double thickness_m = 0.5e-3;
    double visibility = 1.0; // fringe-contrast scale in [0,1]

    /// Fresnel amplitude coefficient (n - n_a)/(n + n_a).
    double gamma() const { return (n - n_a) / (n + n_a); }

    /// Throws DomainError on violated invariants.
    void validate() const;
};

/// Reflected-interference amplitude of the window,
/// Gamma = gamma (1 - e^{-i phi}) / (1 - gamma^2 e^{-i phi}) with
/// phi = 2 (2 pi / lambda) n L. |Gamma| < 1 for valid parameters.
std::complex<double> etalon_amplitude(double lambda_m, const EtalonParams& p);

/// 1 - V |Gamma(lambda)|^2, in (0, 1].
double window_transmittance(double lambda_m, const EtalonParams& p);

/// eta_base scaled by the window transmittance at lambda.
double generalized_efficiency(double eta_base, double lambda_m, const EtalonParams& p);

/// First-order spacing of adjacent transmittance maxima, lambda^2/(2 n L).
double free_spectral_range(double lambda_m, const EtalonParams& p);

} // namespace spdcal
