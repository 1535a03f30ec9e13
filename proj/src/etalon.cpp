#include "spdcal/etalon.hpp"

#include "spdcal/errors.hpp"

#include <cmath>
#include <numbers>

namespace spdcal {

void EtalonParams::validate() const {
    if (!(n_a > 0.0) || !(n > n_a)) throw DomainError("etalon requires n > n_a > 0");
    if (!(thickness_m > 0.0)) throw DomainError("etalon thickness must be > 0");
    if (visibility < 0.0 || visibility > 1.0) throw DomainError("visibility must be in [0,1]");
}

std::complex<double> etalon_amplitude(double lambda_m, const EtalonParams& p) {
    if (!(lambda_m > 0.0)) throw DomainError("wavelength must be > 0");
    p.validate();
    const double g = p.gamma();
    const double phi = 2.0 * (2.0 * std::numbers::pi / lambda_m) * p.n * p.thickness_m;
    const std::complex<double> e = std::exp(std::complex<double>(0.0, -phi));
    return g * (1.0 - e) / (1.0 - g * g * e);
}

double window_transmittance(double lambda_m, const EtalonParams& p) {
    const double g2 = std::norm(etalon_amplitude(lambda_m, p));
    return 1.0 - p.visibility * g2;
}

double generalized_efficiency(double eta_base, double lambda_m, const EtalonParams& p) {
    if (eta_base < 0.0 || eta_base > 1.0) throw DomainError("eta_base must be in [0,1]");
    return eta_base * window_transmittance(lambda_m, p);
}

double free_spectral_range(double lambda_m, const EtalonParams& p) {
    if (!(lambda_m > 0.0)) throw DomainError("wavelength must be > 0");
    p.validate();
    return lambda_m * lambda_m / (2.0 * p.n * p.thickness_m);
}

} // namespace spdcal
