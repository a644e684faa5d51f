#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "jump_sim.hpp"
#include "steady_state.hpp"

namespace twolevel {

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    double n_effective = 1.0; ///< independent units behind the error bar
};

struct PsdPoint {
    double omega, value, std_error;
};

struct PsdEstimate {
    std::vector<PsdPoint> points; ///< ascending omega, DC bin excluded
    double bin_width = 0.0;
    int n_segments = 0; ///< segments actually averaged
};

namespace detail {

/// Correlation-time proxy: inverse of the zero-frequency constant of the
/// fluctuation denominator, the slowest relaxation scale of the linearized
/// dynamics.
inline double correlation_time_guess(const LaserParams& p) {
    const auto ss = steady_state(p);
    const double k = std::abs(p.gamma * ss.n2 - p.alpha * ss.m_hat);
    return k > 0.0 ? 1.0 / k : 1.0;
}

/// Batch count: max(20, duration/(50 tau)), clamped so every batch keeps a
/// handful of samples.
inline std::size_t batch_count(const LaserParams& p, double measured_duration,
                               std::size_t n_samples) {
    const double tau = correlation_time_guess(p);
    const double raw = std::floor(measured_duration / (50.0 * tau));
    std::size_t b = raw < 20.0 ? 20 : std::size_t(std::min(raw, 1e12));
    b = std::min(b, n_samples / 5);
    return std::max<std::size_t>(b, 20);
}

struct BatchMoments {
    std::vector<double> mean_m, mean_m2;
    double grand_m = 0.0, grand_m2 = 0.0;
};

inline BatchMoments batch_moments(const Trajectory& tr) {
    const auto& xs = tr.samples;
    if (xs.size() < 100)
        throw std::invalid_argument("need at least 100 samples past burn-in");
    const std::size_t B =
        batch_count(tr.params, tr.config.duration - tr.config.burn_in, xs.size());
    const std::size_t L = xs.size() / B;
    BatchMoments bm;
    bm.mean_m.resize(B);
    bm.mean_m2.resize(B);
    for (std::size_t b = 0; b < B; ++b) {
        double a1 = 0.0, a2 = 0.0;
        for (std::size_t i = b * L; i < (b + 1) * L; ++i) {
            const double m = double(xs[i].m);
            a1 += m;
            a2 += m * m;
        }
        bm.mean_m[b] = a1 / double(L);
        bm.mean_m2[b] = a2 / double(L);
        bm.grand_m += bm.mean_m[b];
        bm.grand_m2 += bm.mean_m2[b];
    }
    bm.grand_m /= double(B);
    bm.grand_m2 /= double(B);
    return bm;
}

/// Iterative radix-2 FFT, decimation in time.  Segment lengths are powers of
/// two by construction, so nothing more general is needed; keeping it local
/// makes the estimator bit-deterministic across platforms.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / double(len);
        const std::complex<double> step(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= step;
            }
        }
    }
}

} // namespace detail

/// Batch-means estimate of the mean photon number.
inline EstimateWithError estimate_mean_photon(const Trajectory& tr) {
    const auto bm = detail::batch_moments(tr);
    const std::size_t B = bm.mean_m.size();
    double var = 0.0;
    for (double mu : bm.mean_m) var += (mu - bm.grand_m) * (mu - bm.grand_m);
    var /= double(B - 1);
    return {bm.grand_m, std::sqrt(var / double(B)), double(B)};
}

/// Batch-means estimate of the Fano factor var(m)/mean(m).  The ratio's
/// standard error propagates the batch covariance of (mean, second moment)
/// through the first-order delta method for g(mu, s) = s/mu - mu.
inline EstimateWithError estimate_fano(const Trajectory& tr) {
    const auto bm = detail::batch_moments(tr);
    const std::size_t B = bm.mean_m.size();
    const double mu = bm.grand_m, s = bm.grand_m2;
    if (mu == 0.0) throw std::runtime_error("Fano undefined for dark trajectory");
    const double fano = s / mu - mu;

    double cmm = 0.0, cms = 0.0, css = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const double dm = bm.mean_m[b] - mu;
        const double ds = bm.mean_m2[b] - s;
        cmm += dm * dm;
        cms += dm * ds;
        css += ds * ds;
    }
    cmm /= double(B - 1);
    cms /= double(B - 1);
    css /= double(B - 1);

    const double gm = -s / (mu * mu) - 1.0;
    const double gs = 1.0 / mu;
    const double var_f = (gm * gm * cmm + 2.0 * gm * gs * cms + gs * gs * css) / double(B);
    return {fano, std::sqrt(std::max(var_f, 0.0)), double(B)};
}

/// Default detection-bin width resolving the spectral structure at the
/// alpha and m^ scales.
inline double default_bin_width(const LaserParams& p) {
    const auto ss = steady_state(p);
    return std::min(0.1 / p.alpha, 0.1 / ss.m_hat);
}

/// Segment-averaged periodogram of binned detection counts, normalized so an
/// ideal Poisson stream reads 1 at every frequency.
///
/// Counts are binned from the first detection (making the estimate invariant
/// under a common time shift), split into segments whose length is the
/// largest power of two compatible with n_segments, mean-subtracted per
/// segment (rectangular window, so only the DC bin is affected), transformed,
/// and averaged.  Frequencies are reported up to a quarter of the sampling
/// rate, i.e. omega <= pi/(2 bin_width).
///
/// Finite bins integrate the point process over bin_width, which low-pass
/// filters the excess correlation structure but not the flat counting floor;
/// the sinc^2 attenuation is therefore undone on the excess only:
/// S = 1 + (P - 1)/sinc^2(omega bin_width / 2).  A literal division of the
/// whole spectrum would destroy the Poisson calibration at high frequency.
inline PsdEstimate estimate_psd(const std::vector<double>& detections, double duration,
                                double bin_width, int n_segments) {
    if (detections.empty()) throw std::invalid_argument("empty detection stream");
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
        throw std::invalid_argument("bin_width must be positive and finite");
    if (n_segments < 1) throw std::invalid_argument("n_segments must be >= 1");
    const double n_total_f = std::floor(duration / bin_width);
    if (!(n_total_f >= 64.0 * double(n_segments)))
        throw std::invalid_argument(
            "bin_width incompatible with duration: fewer than 64 bins per segment");

    const std::size_t n_total = std::size_t(n_total_f);
    std::size_t n_fft = 64;
    while (n_fft * 2 <= n_total / std::size_t(n_segments)) n_fft *= 2;
    const std::size_t n_seg = n_total / n_fft;
    const std::size_t n_used = n_seg * n_fft;

    const double t0 = detections.front();
    std::vector<float> counts(n_used, 0.0f);
    std::size_t kept = 0;
    for (double t : detections) {
        const double rel = t - t0;
        if (rel < 0.0) throw std::invalid_argument("detection timestamps must be sorted");
        const std::size_t idx = std::size_t(rel / bin_width);
        if (idx < n_used) {
            counts[idx] += 1.0f;
            ++kept;
        }
    }
    const double cbar = double(kept) / double(n_used);
    if (!(cbar > 0.0)) throw std::invalid_argument("mean count per bin is zero");

    const std::size_t n_report = n_fft / 4;
    std::vector<double> mean(n_report + 1, 0.0), m2(n_report + 1, 0.0);
    std::vector<std::complex<double>> buf(n_fft);
    for (std::size_t g = 0; g < n_seg; ++g) {
        double seg_mean = 0.0;
        for (std::size_t k = 0; k < n_fft; ++k) seg_mean += counts[g * n_fft + k];
        seg_mean /= double(n_fft);
        for (std::size_t k = 0; k < n_fft; ++k)
            buf[k] = std::complex<double>(double(counts[g * n_fft + k]) - seg_mean, 0.0);
        detail::fft_radix2(buf);
        const double norm = double(n_fft) * cbar;
        for (std::size_t j = 1; j <= n_report; ++j) {
            const double pj = std::norm(buf[j]) / norm;
            const double d = pj - mean[j];
            mean[j] += d / double(g + 1);
            m2[j] += d * (pj - mean[j]);
        }
    }

    PsdEstimate out;
    out.bin_width = bin_width;
    out.n_segments = int(n_seg);
    out.points.reserve(n_report);
    for (std::size_t j = 1; j <= n_report; ++j) {
        const double omega = 2.0 * std::numbers::pi * double(j) / (double(n_fft) * bin_width);
        double se = 0.0;
        if (n_seg > 1) se = std::sqrt(std::max(m2[j] / double(n_seg - 1), 0.0) / double(n_seg));
        const double half = 0.5 * omega * bin_width;
        const double sinc = std::sin(half) / half;
        const double corr = sinc * sinc;
        out.points.push_back({omega, 1.0 + (mean[j] - 1.0) / corr, se / corr});
    }
    return out;
}

} // namespace twolevel
