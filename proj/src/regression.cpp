#include "spdcal/regression.hpp"

#include "spdcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spdcal {

namespace {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double cov00 = 0.0, cov01 = 0.0, cov11 = 0.0;
    double chi2 = 0.0;
};

// Weighted least squares of y against x, closed form.
LineFit wls_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w) {
    double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swxx += w[i] * x[i] * x[i];
        swy += w[i] * y[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (!(std::abs(det) > 0.0)) throw FitError("singular design: all abscissae equal");
    LineFit f;
    f.intercept = (swxx * swy - swx * swxy) / det;
    f.slope = (sw * swxy - swx * swy) / det;
    f.cov00 = swxx / det;
    f.cov11 = sw / det;
    f.cov01 = -swx / det;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        f.chi2 += w[i] * r * r;
    }
    return f;
}

// In-place Gaussian elimination with partial pivoting; solves A x = b.
template <int N>
void solve_linear(std::array<std::array<double, N>, N>& a, std::array<double, N>& b) {
    for (int col = 0; col < N; ++col) {
        int pivot = col;
        for (int r = col + 1; r < N; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (!(std::abs(a[pivot][col]) > 0.0)) throw FitError("singular normal equations");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < N; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = N - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < N; ++c) s -= a[r][c] * b[c];
        b[r] = s / a[r][r];
    }
}

} // namespace

ZeroFluxFit fit_zero_flux(std::span<const FluxPoint> points,
                          double shared_systematic_rel) {
    if (points.size() < 2) throw FitError("zero-flux fit needs at least 2 points");
    if (shared_systematic_rel < 0.0) throw DomainError("systematic part must be >= 0");

    double rate_min = points[0].rate, rate_max = points[0].rate;
    bool any_exact = false, any_noisy = false;
    for (const auto& p : points) {
        if (p.rate < 0.0) throw DomainError("rates must be >= 0");
        rate_min = std::min(rate_min, p.rate);
        rate_max = std::max(rate_max, p.rate);
        (p.u_stat > 0.0 ? any_noisy : any_exact) = true;
    }
    if (rate_max == rate_min) throw FitError("singular design: all rates equal");
    if (rate_max < 10.0 * rate_min) {
        throw FitError("rates must span at least a factor of 10 for the extrapolation");
    }
    if (any_exact && any_noisy) {
        throw FitError("mixed exact and noisy points; weights undefined");
    }

    std::vector<double> x, y, w;
    for (const auto& p : points) {
        x.push_back(p.rate);
        y.push_back(p.eta);
        w.push_back(any_noisy ? 1.0 / (p.u_stat * p.u_stat) : 1.0);
    }
    const LineFit line = wls_line(x, y, w);

    ZeroFluxFit fit;
    fit.covariance = {{{line.cov00, line.cov01}, {line.cov01, line.cov11}}};
    fit.chi2 = line.chi2;
    fit.dof = static_cast<int>(points.size()) - 2;
    const double u0 = std::hypot(std::sqrt(line.cov00),
                                 shared_systematic_rel * std::abs(line.intercept));
    fit.eta0 = Quantity(line.intercept, u0);
    fit.dead_time = Quantity(-line.slope, std::sqrt(line.cov11), Unit("s"));
    fit.flagged_negative_dead_time = fit.dead_time.value < 0.0;
    return fit;
}

namespace {

// Model value at one point; p = (nL, V, a, b), baseline centered on lambda_ref.
double sweep_model(double lambda_m, double lambda_ref, const double* p,
                   const EtalonParams& window) {
    EtalonParams w = window;
    w.thickness_m = p[0] / w.n;  // only the product n*L is identifiable
    w.visibility = 1.0;          // V applied explicitly below
    const double g2 = std::norm(etalon_amplitude(lambda_m, w));
    return (p[2] + p[3] * (lambda_m - lambda_ref)) * (1.0 - p[1] * g2);
}

struct SweepData {
    std::vector<double> lambda, eta, sigma;
    double lambda_ref = 0.0;
};

double sweep_chi2(const SweepData& d, const double* p, const EtalonParams& window) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < d.lambda.size(); ++i) {
        const double r = (d.eta[i] - sweep_model(d.lambda[i], d.lambda_ref, p, window)) /
                         d.sigma[i];
        chi2 += r * r;
    }
    return chi2;
}

// Best (a, b) for fixed (nL, V): the model is linear in the baseline.
void sweep_linear_baseline(const SweepData& d, double nl, double v,
                           const EtalonParams& window, double* a, double* b) {
    std::vector<double> x, y, w;
    EtalonParams win = window;
    win.thickness_m = nl / win.n;
    win.visibility = 1.0;
    for (std::size_t i = 0; i < d.lambda.size(); ++i) {
        const double g = 1.0 - v * std::norm(etalon_amplitude(d.lambda[i], win));
        // (a + b dl) g = eta  ->  fit eta/g against dl with weights (g/sigma)^2
        x.push_back(d.lambda[i] - d.lambda_ref);
        y.push_back(d.eta[i] / g);
        w.push_back((g / d.sigma[i]) * (g / d.sigma[i]));
    }
    const LineFit f = wls_line(x, y, w);
    *a = f.intercept;
    *b = f.slope;
}

} // namespace

SweepFit fit_etalon_sweep(std::span<const SweepPoint> points,
                          const EtalonParams& window_guess) {
    if (points.size() < 8) throw FitError("etalon sweep fit needs at least 8 points");
    window_guess.validate();

    SweepData d;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0 && !(points[i].lambda_m > points[i - 1].lambda_m)) {
            throw FitError("wavelengths must be strictly increasing");
        }
        d.lambda.push_back(points[i].lambda_m);
        d.eta.push_back(points[i].eta.value);
        d.sigma.push_back(points[i].eta.u > 0.0 ? points[i].eta.u : 1.0);
        d.lambda_ref += points[i].lambda_m;
    }
    d.lambda_ref /= static_cast<double>(points.size());
    const std::size_t n = d.lambda.size();

    // Detrended residuals for the periodogram.
    std::vector<double> dl(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        dl[i] = d.lambda[i] - d.lambda_ref;
        w[i] = 1.0 / (d.sigma[i] * d.sigma[i]);
    }
    const LineFit base = wls_line(dl, d.eta, w);
    std::vector<double> resid(n), x(n);
    double resid_power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        resid[i] = d.eta[i] - base.intercept - base.slope * dl[i];
        x[i] = 1.0 / d.lambda[i];
        resid_power += w[i] * resid[i] * resid[i];
    }
    const double span_x = std::abs(x.front() - x.back());
    const double mean_dx = span_x / static_cast<double>(n - 1);

    SweepFit fit;
    fit.lambda_ref_m = d.lambda_ref;
    fit.eta_base_intercept = base.intercept;
    fit.eta_base_slope = base.slope;

    auto finish_baseline = [&](void) -> SweepFit {
        fit.baseline_only = true;
        fit.converged = true;
        fit.visibility = 0.0;
        fit.optical_thickness_m = window_guess.n * window_guess.thickness_m;
        fit.residual_chi2 = base.chi2;
        fit.dof = static_cast<int>(n) - 2;
        return fit;
    };

    if (!(resid_power > 0.0)) return finish_baseline();  // exactly flat data

    // Periodogram over fringe frequency f = 2 n L in the x = 1/lambda domain.
    const double f_guess = 2.0 * window_guess.n * window_guess.thickness_m;
    const double f_lo = std::max(1.0 / span_x, f_guess / 3.0);
    const double f_hi = std::max(f_guess * 3.0, f_lo * 1.5);
    // Grid fine enough to resolve the frequency comb (tooth spacing is
    // about one wavelength in the x = 1/lambda domain).
    const int kGrid = std::clamp(
        static_cast<int>(std::ceil((f_hi - f_lo) / (d.lambda_ref / 8.0))) + 1, 4000,
        200000);
    double best_f = f_lo, best_power = -1.0, mean_power = 0.0;
    double sw = 0.0;
    for (std::size_t i = 0; i < n; ++i) sw += w[i];
    for (int k = 0; k < kGrid; ++k) {
        const double f = f_lo + (f_hi - f_lo) * k / (kGrid - 1.0);
        double cs = 0.0, sn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ph = 2.0 * std::numbers::pi * f * x[i];
            cs += w[i] * resid[i] * std::cos(ph);
            sn += w[i] * resid[i] * std::sin(ph);
        }
        const double power = (cs * cs + sn * sn) / (sw * resid_power);
        mean_power += power;
        if (power > best_power) {
            best_power = power;
            best_f = f;
        }
    }
    mean_power /= kGrid;
    if (best_power < 4.0 * mean_power) return finish_baseline();  // no dominant fringe

    // The periodogram magnitude is blind to the fringe phase, but the
    // model's phase is fixed by nL. Align the phase by scanning nL over
    // one tooth (lambda/2 shifts the phase by a full turn) jointly with a
    // coarse visibility grid, solving the baseline linearly each time.
    const double tooth = 0.5 * d.lambda_ref;
    const double nl_peak = best_f / 2.0;
    double nl0 = nl_peak;
    double best_v = 0.0, best_chi2 = base.chi2;
    for (int j = 0; j < 64; ++j) {
        const double nl_c = nl_peak + (j / 64.0 - 0.5) * tooth;
        for (int k = 1; k <= 10; ++k) {
            const double v = k / 10.0;
            double a, b;
            sweep_linear_baseline(d, nl_c, v, window_guess, &a, &b);
            const double p[4] = {nl_c, v, a, b};
            const double c2 = sweep_chi2(d, p, window_guess);
            if (c2 < best_chi2) {
                best_chi2 = c2;
                best_v = v;
                nl0 = nl_c;
            }
        }
    }
    if (best_v == 0.0 || best_chi2 > 0.95 * base.chi2) return finish_baseline();

    // Damped Gauss-Newton refinement over (nL, V, a, b).
    const double lambda_span = d.lambda.back() - d.lambda.front();
    const double steps[4] = {d.lambda_ref * 1e-4, 1e-5, 1e-6, 1e-6 / lambda_span};
    auto run_lm = [&](double* p, int max_iter) -> double {
        double chi2 = sweep_chi2(d, p, window_guess);
        double damping = 1e-3;
        bool converged = false;
        int iter = 0;
        for (; iter < max_iter && !converged; ++iter) {
            // numeric Jacobian of the weighted residuals
            std::vector<std::array<double, 4>> jac(n);
            for (int j = 0; j < 4; ++j) {
                double pp[4], pm[4];
                std::copy(p, p + 4, pp);
                std::copy(p, p + 4, pm);
                pp[j] += steps[j];
                pm[j] -= steps[j];
                for (std::size_t i = 0; i < n; ++i) {
                    const double mp =
                        sweep_model(d.lambda[i], d.lambda_ref, pp, window_guess);
                    const double mm =
                        sweep_model(d.lambda[i], d.lambda_ref, pm, window_guess);
                    jac[i][j] = -(mp - mm) / (2.0 * steps[j] * d.sigma[i]);
                }
            }
            std::array<std::array<double, 4>, 4> h{};
            std::array<double, 4> g{};
            for (std::size_t i = 0; i < n; ++i) {
                const double r = (d.eta[i] - sweep_model(d.lambda[i], d.lambda_ref, p,
                                                         window_guess)) /
                                 d.sigma[i];
                for (int a2 = 0; a2 < 4; ++a2) {
                    g[a2] -= jac[i][a2] * r;
                    for (int b2 = 0; b2 < 4; ++b2) h[a2][b2] += jac[i][a2] * jac[i][b2];
                }
            }
            bool accepted = false;
            for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
                auto hd = h;
                auto rhs = g;
                for (int j = 0; j < 4; ++j) hd[j][j] *= 1.0 + damping;
                try {
                    solve_linear<4>(hd, rhs);
                } catch (const FitError&) {
                    damping *= 5.0;
                    continue;
                }
                double cand[4];
                for (int j = 0; j < 4; ++j) cand[j] = p[j] + rhs[j];
                cand[0] = std::max(cand[0], 0.25 * nl0);
                cand[1] = std::clamp(cand[1], 0.0, 1.0);
                const double c2 = sweep_chi2(d, cand, window_guess);
                if (c2 <= chi2) {
                    if (chi2 - c2 < 1e-9 * std::max(chi2, 1e-30)) converged = true;
                    std::copy(cand, cand + 4, p);
                    chi2 = c2;
                    damping = std::max(damping / 3.0, 1e-12);
                    accepted = true;
                } else {
                    damping *= 5.0;
                }
            }
            if (!accepted) converged = true;  // damping saturated at a minimum
        }
        if (!converged) {
            throw FitError("etalon sweep fit did not converge in " +
                           std::to_string(max_iter) + " iterations");
        }
        return chi2;
    };

    double p[4];
    p[0] = nl0;
    p[1] = best_v;
    sweep_linear_baseline(d, nl0, best_v, window_guess, &p[2], &p[3]);
    double chi2 = run_lm(p, 200);

    // The fringe frequency is ambiguous by the sampling comb: thicknesses
    // nl + k * lambda/2 fit almost equally well. Try the neighboring comb
    // teeth and keep the best; the chosen offset is the ambiguity class.
    int best_k = 0;
    for (int k = -6; k <= 6; ++k) {
        if (k == 0) continue;
        double q[4] = {p[0] + k * tooth, p[1], p[2], p[3]};
        if (!(q[0] > 0.0)) continue;
        try {
            const double c2 = run_lm(q, 80);
            if (c2 < chi2) {
                chi2 = c2;
                std::copy(q, q + 4, p);
                best_k = k;
            }
        } catch (const FitError&) {
            // a non-converging side tooth is simply not taken
        }
    }

    fit.optical_thickness_m = p[0];
    fit.visibility = p[1];
    fit.eta_base_intercept = p[2];
    fit.eta_base_slope = p[3];
    fit.residual_chi2 = chi2;
    fit.dof = static_cast<int>(n) - 4;
    fit.converged = true;
    fit.ambiguity_class =
        static_cast<int>(std::llround((p[0] - nl_peak) / tooth));
    (void)best_k;
    (void)mean_dx;
    return fit;
}

} // namespace spdcal
