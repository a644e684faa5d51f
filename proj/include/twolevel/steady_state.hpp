#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "params.hpp"

namespace twolevel {

/// Deterministic operating point of the laser.
struct SteadyState {
    double m;     ///< mean intracavity photon number
    double n2;    ///< mean upper-level population
    double n0;    ///< mean ground-level population
    double J_hat; ///< normalized pump J/alpha
    double m_hat; ///< shorthand m + gamma + 1
};

/// Computes the stationary operating point.  The mean photon number is the
/// non-negative root of
///
///     m^2 + m (gamma + 1 - J/alpha) - J/alpha = 0,
///
/// obtained by eliminating n2 from the stationary balance equations.  The
/// root is evaluated without subtractive cancellation for either sign of the
/// linear coefficient, so gamma = 0 yields m = J/alpha to roundoff even for
/// very large pumps.
inline SteadyState steady_state(const LaserParams& p) {
    validate_params(p);
    const double J_hat = p.J / p.alpha;
    double m = 0.0;
    if (p.J > 0.0) {
        const double b = p.gamma + 1.0 - J_hat;
        const double disc = std::sqrt(b * b + 4.0 * J_hat);
        m = (b <= 0.0) ? 0.5 * (disc - b) : 2.0 * J_hat / (b + disc);
    }
    const double n2 = p.alpha * m / (m + 1.0);
    return SteadyState{m, n2, p.N - n2, J_hat, m + p.gamma + 1.0};
}

/// Residuals of the two stationary balance equations,
///
///     (J - R - S,  Q - R)   with  R = (m+1) n2,  S = gamma n2,  Q = alpha m.
///
/// Both vanish at the exact steady state; this is the independent oracle for
/// steady_state.
inline std::pair<double, double> balance_residuals(const LaserParams& p, const SteadyState& ss) {
    const double R = (ss.m + 1.0) * ss.n2;
    const double S = p.gamma * ss.n2;
    const double Q = p.alpha * ss.m;
    return {p.J - R - S, Q - R};
}

/// The model assumes nearly all atoms rest in the ground state; an upper
/// level holding more than 99% of N signals parameters outside its validity.
inline std::optional<std::string> ground_depletion_warning(const LaserParams& p,
                                                           const SteadyState& ss) {
    if (ss.n2 > 0.99 * p.N) {
        return "n2 = " + std::to_string(ss.n2) + " exceeds 99% of N = " + std::to_string(p.N) +
               "; the weak-excitation assumption is violated";
    }
    return std::nullopt;
}

} // namespace twolevel
