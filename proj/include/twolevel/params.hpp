#pragma once

#include <cmath>
#include <stdexcept>

namespace twolevel {

/// Physical inputs for the two-level laser, in units where the gain g = 1.
struct LaserParams {
    double N = 1e5;     ///< number of active atoms
    double alpha = 1.0; ///< photon absorption/detection rate per photon
    double gamma = 0.0; ///< spontaneous decay rate out of the lasing mode
    double J = 0.0;     ///< mean pump rate (atoms promoted per unit time)
    double xi = 1.0;    ///< pump noise parameter: 1 Poissonian, 0 quiet
};

/// Checks the physical-domain invariants and returns the parameters
/// unchanged.  Throws std::invalid_argument with a distinct message per
/// violated constraint.
inline LaserParams validate_params(const LaserParams& p) {
    if (!std::isfinite(p.N)) throw std::invalid_argument("N must be finite");
    if (!std::isfinite(p.alpha)) throw std::invalid_argument("alpha must be finite");
    if (!std::isfinite(p.gamma)) throw std::invalid_argument("gamma must be finite");
    if (!std::isfinite(p.J)) throw std::invalid_argument("J must be finite");
    if (!std::isfinite(p.xi)) throw std::invalid_argument("xi must be finite");
    if (p.N < 1.0) throw std::invalid_argument("N must be >= 1");
    if (p.alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
    if (p.gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
    if (p.J < 0.0) throw std::invalid_argument("J must be non-negative");
    if (p.xi < 0.0 || p.xi > 1.0) throw std::invalid_argument("xi must be within [0, 1]");
    return p;
}

} // namespace twolevel
