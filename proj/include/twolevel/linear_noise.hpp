#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "params.hpp"
#include "steady_state.hpp"

namespace twolevel {

enum class Target { DeltaQ, DeltaM };
enum class SpectrumKind { Photocurrent, Intracavity };

/// Frequency-domain coefficients mapping each Langevin force to the chosen
/// fluctuation (photocurrent DeltaQ or photon number DeltaM).
struct TransferCoeffs {
    Target target;
    double omega;
    std::complex<double> c_j, c_q, c_r, c_s;
};

/// White-noise spectral densities of the four Langevin forces; each equals
/// the corresponding mean event rate.
struct LangevinDensities {
    double sigma_j, sigma_q, sigma_r, sigma_s;
};

struct SpectrumPoint {
    double omega, value;
};

struct SpectrumSeries {
    std::vector<SpectrumPoint> points;
    SpectrumKind kind;
};

struct PsdPeak {
    double omega_star;
    double s_max;
};

namespace detail {

/// Response of (dm, dn2) to one force column.
struct FlucResponse {
    std::complex<double> dm, dn2;
};

/// Solves the linearized fluctuation system
///
///     (i w + alpha - n2) dm - (m+1)     dn2 = b1
///           n2           dm + (i w + m^) dn2 = b2
///
/// by Cramer's rule.  The determinant expands to
/// -w^2 + i w (alpha - n2 + m^) + (alpha m^ - gamma n2) and has no real zero
/// for J > 0 because its constant term is then strictly positive.
inline FlucResponse solve_fluctuations(const SteadyState& ss, double alpha, double omega,
                                       double b1, double b2) {
    const std::complex<double> iw(0.0, omega);
    const std::complex<double> a11 = iw + (alpha - ss.n2);
    const std::complex<double> a12 = -(ss.m + 1.0);
    const std::complex<double> a21 = ss.n2;
    const std::complex<double> a22 = iw + ss.m_hat;
    const std::complex<double> det = a11 * a22 - a12 * a21;
    if (det == std::complex<double>(0.0, 0.0))
        throw std::runtime_error("fluctuation system is singular: inconsistent steady state");
    return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
}

} // namespace detail

/// Solves the fluctuation system once per Langevin force and reads off the
/// transfer coefficients.  Force columns on the right-hand side: the pump
/// feeds the population equation, detection subtracts from the photon
/// equation, the stimulated exchange drives both with opposite signs, and
/// spontaneous decay drains the population.  For DeltaQ = alpha DeltaM + q
/// the detection force additionally passes through directly.
inline TransferCoeffs transfer_coefficients(const LaserParams& p, const SteadyState& ss,
                                            double omega, Target target) {
    const auto xj = detail::solve_fluctuations(ss, p.alpha, omega, 0.0, 1.0);
    const auto xq = detail::solve_fluctuations(ss, p.alpha, omega, -1.0, 0.0);
    const auto xr = detail::solve_fluctuations(ss, p.alpha, omega, 1.0, -1.0);
    const auto xs = detail::solve_fluctuations(ss, p.alpha, omega, 0.0, -1.0);
    TransferCoeffs tc{target, omega, xj.dm, xq.dm, xr.dm, xs.dm};
    if (target == Target::DeltaQ) {
        tc.c_j *= p.alpha;
        tc.c_r *= p.alpha;
        tc.c_s *= p.alpha;
        tc.c_q = p.alpha * tc.c_q + 1.0;
    }
    return tc;
}

inline LangevinDensities langevin_densities(const LaserParams& p, const SteadyState& ss) {
    return {p.xi * p.J, p.alpha * ss.m, (ss.m + 1.0) * ss.n2, p.gamma * ss.n2};
}

namespace detail {

/// Unnormalized spectrum sum(|c_z|^2 sigma_z) for the chosen target.
inline double spectrum_sum(const LaserParams& p, const SteadyState& ss, double omega,
                           Target target) {
    const auto tc = transfer_coefficients(p, ss, omega, target);
    const auto sg = langevin_densities(p, ss);
    return std::norm(tc.c_j) * sg.sigma_j + std::norm(tc.c_q) * sg.sigma_q +
           std::norm(tc.c_r) * sg.sigma_r + std::norm(tc.c_s) * sg.sigma_s;
}

inline void require_bright(const LaserParams& p, const char* what) {
    if (!(p.J > 0.0)) throw std::invalid_argument(what);
}

/// Coefficients of the closed-form spectra as polynomials in x = Omega^2:
///
///     S(Omega)    = 1 + (alpha/m) (u1 x + u0) / (x^2 + d1 x + d0)
///     S_dm(Omega) =     (1/m)     (v1 x + v0) / (x^2 + d1 x + d0)
struct ClosedFormCoeffs {
    double u1, u0, v1, v0, d1, d0;
};

inline ClosedFormCoeffs closed_form_coeffs(const LaserParams& p, const SteadyState& ss) {
    const double m = ss.m, n2 = ss.n2, mh = ss.m_hat;
    const double mp1 = m + 1.0;
    const double gn2_amh = p.gamma * n2 - p.alpha * mh; // strictly negative for J > 0
    ClosedFormCoeffs c;
    c.u1 = n2 * (3.0 * m + 1.0) - p.alpha * m;
    c.u0 = n2 * (3.0 * m + 1.0) * p.gamma * mh - p.alpha * m * mh * mh + p.J * mp1 * mp1 * p.xi;
    c.v1 = n2 * mp1 + p.alpha * m;
    c.v0 = n2 * mp1 * p.gamma * mh + p.alpha * m * mh * mh + p.J * mp1 * mp1 * p.xi;
    c.d1 = (mh + p.alpha - n2) * (mh + p.alpha - n2) + 2.0 * gn2_amh;
    c.d0 = gn2_amh * gn2_amh;
    return c;
}

} // namespace detail

/// Normalized photocurrent spectral density via the linear-system solve (the
/// normative path).  The shot-noise floor of an ideal Poisson stream is 1.
inline double photocurrent_psd(const LaserParams& p, const SteadyState& ss, double omega) {
    detail::require_bright(p, "spectrum undefined for dark laser");
    return detail::spectrum_sum(p, ss, omega, Target::DeltaQ) / (p.alpha * ss.m);
}

inline double photocurrent_psd(const LaserParams& p, double omega) {
    return photocurrent_psd(p, steady_state(p), omega);
}

/// Closed-form photocurrent density; serves as the cross-check oracle for
/// photocurrent_psd.
inline double photocurrent_psd_closed_form(const LaserParams& p, const SteadyState& ss,
                                           double omega) {
    detail::require_bright(p, "spectrum undefined for dark laser");
    const auto c = detail::closed_form_coeffs(p, ss);
    const double x = omega * omega;
    return 1.0 + (p.alpha / ss.m) * (c.u1 * x + c.u0) / ((x + c.d1) * x + c.d0);
}

inline double photocurrent_psd_closed_form(const LaserParams& p, double omega) {
    return photocurrent_psd_closed_form(p, steady_state(p), omega);
}

/// Normalized spectral density of the photon-number fluctuation, via the
/// linear-system solve.
inline double intracavity_psd(const LaserParams& p, const SteadyState& ss, double omega) {
    detail::require_bright(p, "undefined for dark laser");
    return detail::spectrum_sum(p, ss, omega, Target::DeltaM) / ss.m;
}

inline double intracavity_psd(const LaserParams& p, double omega) {
    return intracavity_psd(p, steady_state(p), omega);
}

/// Closed-form intracavity density; oracle for intracavity_psd.
inline double intracavity_psd_closed_form(const LaserParams& p, const SteadyState& ss,
                                          double omega) {
    detail::require_bright(p, "undefined for dark laser");
    const auto c = detail::closed_form_coeffs(p, ss);
    const double x = omega * omega;
    return (1.0 / ss.m) * (c.v1 * x + c.v0) / ((x + c.d1) * x + c.d0);
}

inline double intracavity_psd_closed_form(const LaserParams& p, double omega) {
    return intracavity_psd_closed_form(p, steady_state(p), omega);
}

/// Maximizes S(Omega) over Omega >= 0.
///
/// With x = Omega^2 the excess S - 1 is a degree-(1,2) rational function
/// whose stationary points solve
///
///     u1 x^2 + 2 u0 x + (u0 d1 - u1 d0) = 0.
///
/// u1 = 2 alpha m^2/(m+1) > 0 whenever J > 0, so the quadratic never
/// degenerates.  A coarse scan with golden-section refinement guards the
/// closed form; flat spectra (all candidates within 1e-12 of the lower
/// envelope) report the boundary (0, S(0)).
inline PsdPeak psd_peak(const LaserParams& p) {
    const auto ss = steady_state(p);
    detail::require_bright(p, "spectrum undefined for dark laser");
    const auto c = detail::closed_form_coeffs(p, ss);
    const double k = p.alpha / ss.m;
    auto S_of_x = [&](double x) {
        return 1.0 + k * (c.u1 * x + c.u0) / ((x + c.d1) * x + c.d0);
    };

    const double s0 = S_of_x(0.0);
    double best_x = 0.0;
    double best_s = s0;

    const double qa = c.u1, qb = 2.0 * c.u0, qc = c.u0 * c.d1 - c.u1 * c.d0;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double t = -0.5 * (qb + std::copysign(sq, qb == 0.0 ? 1.0 : qb));
        const double roots[2] = {t / qa, t != 0.0 ? qc / t : 0.0};
        for (double x : roots) {
            if (x > 0.0 && std::isfinite(x)) {
                const double s = S_of_x(x);
                if (s > best_s) {
                    best_s = s;
                    best_x = x;
                }
            }
        }
    }

    // Safeguard scan; the stationarity roots should always win.
    const double scale = std::max({p.alpha, ss.m_hat, std::pow(c.d0, 0.25)});
    const int n_scan = 160;
    const double lw = std::log(1e-3 * scale), hw = std::log(1e3 * scale);
    int scan_i = -1;
    double scan_s = best_s;
    for (int i = 0; i < n_scan; ++i) {
        const double w = std::exp(lw + (hw - lw) * double(i) / double(n_scan - 1));
        const double s = S_of_x(w * w);
        if (s > scan_s) {
            scan_s = s;
            scan_i = i;
        }
    }
    if (scan_i >= 0 && scan_s > best_s + 1e-12 * std::max(1.0, std::abs(best_s))) {
        double lo = std::exp(lw + (hw - lw) * double(std::max(0, scan_i - 1)) / double(n_scan - 1));
        double hi = std::exp(lw + (hw - lw) * double(std::min(n_scan - 1, scan_i + 1)) / double(n_scan - 1));
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = S_of_x(x1 * x1), f2 = S_of_x(x2 * x2);
        for (int it = 0; it < 200 && (hi - lo) > 1e-14 * std::max(1.0, hi); ++it) {
            if (f1 < f2) {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = S_of_x(x2 * x2);
            } else {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = S_of_x(x1 * x1);
            }
        }
        const double w = 0.5 * (lo + hi);
        const double s = S_of_x(w * w);
        if (s > best_s) {
            best_s = s;
            best_x = w * w;
        }
    }

    if (best_s - std::min(s0, 1.0) < 1e-12) return {0.0, s0};
    if (best_s <= s0) return {0.0, s0};
    return {std::sqrt(best_x), best_s};
}

/// Tabulates a spectrum over a strictly increasing frequency grid.
inline SpectrumSeries spectrum_sweep(const LaserParams& p, const std::vector<double>& omega_grid,
                                     SpectrumKind kind = SpectrumKind::Photocurrent) {
    const auto ss = steady_state(p);
    detail::require_bright(p, "spectrum undefined for dark laser");
    for (std::size_t i = 1; i < omega_grid.size(); ++i)
        if (!(omega_grid[i] > omega_grid[i - 1]))
            throw std::invalid_argument("omega grid must be strictly increasing");
    SpectrumSeries out{{}, kind};
    out.points.reserve(omega_grid.size());
    for (double w : omega_grid) {
        const double v = kind == SpectrumKind::Photocurrent ? photocurrent_psd(p, ss, w)
                                                            : intracavity_psd(p, ss, w);
        out.points.push_back({w, v});
    }
    return out;
}

} // namespace twolevel
