#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "linear_noise.hpp"

namespace twolevel {

namespace detail {

/// (1/2pi) * integral over the real line of (a w^2 + b)/((w^2+p^2)(w^2+q^2)),
/// expressed through the elementary symmetric combinations pq and p+q.  Both
/// combinations stay real and positive on either side of critical damping, so
/// this single expression covers the overdamped and the underdamped
/// (complex-conjugate pole pair) regimes without branch cuts.
inline double rational_integral(double a, double b, double pq, double p_plus_q) {
    return (a + b / pq) / (2.0 * p_plus_q);
}

/// Elementary symmetric combinations of the denominator poles:
/// pq = sqrt(d0) and p+q = sqrt(d1 + 2 pq), which reduce to
/// alpha m^ - gamma n2 and m^ + alpha - n2; both are strictly positive for
/// J > 0.
struct PoleSymmetrics {
    double pq, p_plus_q;
};

inline PoleSymmetrics pole_symmetrics(const LaserParams& p, const SteadyState& ss) {
    return {p.alpha * ss.m_hat - p.gamma * ss.n2, ss.m_hat + p.alpha - ss.n2};
}

} // namespace detail

/// Fano factor from the exact integral of the closed-form intracavity
/// spectrum.
inline double fano_closed_form(const LaserParams& p) {
    const auto ss = steady_state(p);
    detail::require_bright(p, "Fano factor undefined for dark laser");
    const auto c = detail::closed_form_coeffs(p, ss);
    const auto ps = detail::pole_symmetrics(p, ss);
    return detail::rational_integral(c.v1, c.v0, ps.pq, ps.p_plus_q) / ss.m;
}

/// Fano factor by adaptive quadrature of the linear-system intracavity
/// spectrum, plus the analytic large-frequency tail.  Independent of
/// fano_closed_form: the integrand is assembled from the 2x2 solve per
/// frequency, not from the printed polynomials.
inline double fano_quadrature(const LaserParams& p) {
    const auto ss = steady_state(p);
    detail::require_bright(p, "Fano factor undefined for dark laser");
    const auto c = detail::closed_form_coeffs(p, ss);
    const auto ps = detail::pole_symmetrics(p, ss);

    // Dominant pole magnitude: the larger real root when overdamped, the
    // common modulus sqrt(pq) for an underdamped conjugate pair.
    const double disc = ps.p_plus_q * ps.p_plus_q - 4.0 * ps.pq;
    const double pole = disc >= 0.0 ? 0.5 * (ps.p_plus_q + std::sqrt(disc)) : std::sqrt(ps.pq);
    const double cut = 1e3 * std::max({p.alpha, ss.m_hat, pole});

    auto integrand = [&](double w) { return intracavity_psd(p, ss, w); };
    double err = 0.0;
    // Overdamped parameter sets can leave the narrower pole many decades
    // below the cutoff; the adaptive bisection needs the depth to reach it.
    const double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, 0.0, cut, 28, 1e-10, &err);
    if (!(err <= 1e-8 * std::max(1.0, std::abs(integral))))
        throw std::runtime_error("Fano quadrature did not converge: achieved error " +
                                 std::to_string(err) + " against target 1e-8 relative");

    // Integrand beyond the cutoff: (1/m)(v1/x + (v0 - v1 d1)/x^3 + ...),
    // integrated analytically; the x^-3 term keeps the truncation bias well
    // under the quadrature tolerance.
    const double tail =
        (c.v1 / cut + (c.v0 - c.v1 * c.d1) / (3.0 * cut * cut * cut)) / ss.m;
    return (integral + tail) / std::numbers::pi;
}

} // namespace twolevel
