#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "params.hpp"
#include "rng.hpp"
#include "steady_state.hpp"

namespace twolevel {

enum class PumpMode { Poissonian, Regular };
enum class EventType { Pump, Stimulated, Spontaneous, Detection };

struct SimConfig {
    double duration = 1000.0;      ///< total simulated time
    double burn_in = 0.0;          ///< discarded initial interval
    double sample_interval = 0.01; ///< spacing of the state-sample grid
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;      ///< independent-trajectory index
    PumpMode pump_mode = PumpMode::Poissonian;
    bool record_detections = true;
};

struct SimState {
    double t = 0.0;
    long long m = 0;
    long long n2 = 0;
};

struct Rates {
    double pump, stimulated, spontaneous, detection;
};

struct EventCounts {
    std::uint64_t pump = 0, stimulated = 0, spontaneous = 0, detection = 0;
    std::uint64_t blocked_pump = 0;
};

struct Sample {
    double t;
    long long m, n2;
};

struct Trajectory {
    std::vector<Sample> samples;    ///< left-limit states on the regular grid
    std::vector<double> detections; ///< detection timestamps in (burn_in, duration]
    EventCounts event_counts;       ///< events inside (burn_in, duration]
    long long m_initial = 0, n2_initial = 0; ///< state when burn-in completes
    long long m_final = 0, n2_final = 0;     ///< state at duration
    LaserParams params;
    SimConfig config;
};

inline void validate_config(const SimConfig& c) {
    if (!(c.duration > 0.0) || !std::isfinite(c.duration))
        throw std::invalid_argument("duration must be positive and finite");
    if (c.burn_in < 0.0 || !std::isfinite(c.burn_in))
        throw std::invalid_argument("burn_in must be non-negative and finite");
    if (c.burn_in >= c.duration)
        throw std::invalid_argument("burn_in must be smaller than duration");
    if (!(c.sample_interval > 0.0) || !std::isfinite(c.sample_interval))
        throw std::invalid_argument("sample_interval must be positive and finite");
    if (c.duration - c.burn_in < c.sample_interval)
        throw std::invalid_argument("duration too short to collect a sample past burn_in");
}

/// Advisory check, separate from the hard validation.
inline std::optional<std::string> config_warning(const SimConfig& c) {
    if (c.sample_interval > (c.duration - c.burn_in) / 100.0)
        return std::string(
            "sample_interval leaves fewer than 100 samples; estimates will be coarse");
    return std::nullopt;
}

/// Instantaneous event rates.  In Regular mode pump arrivals are scheduled
/// deterministically, so the stochastic pump rate is zero there.
inline Rates event_rates(const SimState& s, const LaserParams& p,
                         PumpMode mode = PumpMode::Poissonian) {
    return {mode == PumpMode::Poissonian ? p.J : 0.0,
            double(s.m + 1) * double(s.n2),
            p.gamma * double(s.n2),
            p.alpha * double(s.m)};
}

/// Single-event stencil.  Applying an event whose rate is necessarily zero in
/// the given state throws std::logic_error (test-only diagnostic path; the
/// simulator never reaches it).
inline SimState apply_event(SimState s, EventType e, const LaserParams& p) {
    const long long N = std::llround(p.N);
    switch (e) {
        case EventType::Pump:
            if (s.n2 >= N) throw std::logic_error("pump blocked: n2 = N");
            ++s.n2;
            break;
        case EventType::Stimulated:
            if (s.n2 <= 0) throw std::logic_error("stimulated event with n2 = 0");
            --s.n2;
            ++s.m;
            break;
        case EventType::Spontaneous:
            if (s.n2 <= 0) throw std::logic_error("spontaneous event with n2 = 0");
            --s.n2;
            break;
        case EventType::Detection:
            if (s.m <= 0) throw std::logic_error("detection event with m = 0");
            --s.m;
            break;
    }
    return s;
}

/// Exact stochastic simulation of the jump process.
///
/// Poissonian mode is the classic direct method: exponential waiting time at
/// the total rate, then a categorical event choice.  Regular mode schedules
/// pump arrivals at t_k = k/J and interleaves them with the stochastic
/// events; because all stochastic rates are constant between events, the
/// exponential clock can be re-drawn memorylessly at each pump arrival, and
/// a pump arrival wins exact ties.
///
/// Samples record the left-limit state on the grid burn_in + k*sample_interval
/// and cover [burn_in, duration].  Event counts and detection timestamps
/// cover the measurement window (burn_in, duration]; m_initial/n2_initial is
/// the state once every event at or before burn_in has been applied, so
///
///     #stimulated - #detection = m_final - m_initial
///     #pump - #stimulated - #spontaneous = n2_final - n2_initial
///
/// hold exactly over the window.
inline Trajectory simulate(const LaserParams& params, const SimConfig& config) {
    validate_params(params);
    validate_config(config);
    if (config.pump_mode == PumpMode::Poissonian && params.xi != 1.0)
        throw std::invalid_argument("Poissonian pump mode requires xi = 1");
    if (config.pump_mode == PumpMode::Regular && params.xi != 0.0)
        throw std::invalid_argument("Regular pump mode requires xi = 0");

    const auto ss = steady_state(params);
    const long long N = std::llround(params.N);
    const double T = config.duration;
    const double si = config.sample_interval;

    Trajectory tr;
    tr.params = params;
    tr.config = config;

    SimState s;
    s.m = std::llround(ss.m);
    s.n2 = std::min(std::llround(ss.n2), N);

    SplitMix64 rng(config.seed, config.stream);

    const double span = T - config.burn_in;
    tr.samples.reserve(std::size_t(span / si) + 2);
    if (config.record_detections)
        tr.detections.reserve(std::size_t(params.alpha * ss.m * span * 1.1) + 16);

    std::uint64_t k_sample = 0;
    auto emit_until = [&](double te) {
        for (;;) {
            const double ts = config.burn_in + double(k_sample) * si;
            if (ts > te || ts > T) break;
            tr.samples.push_back({ts, s.m, s.n2});
            ++k_sample;
        }
    };

    bool initial_captured = false;
    std::uint64_t pump_arrivals = 0, blocked = 0;
    std::uint64_t pump_k = 1; // index of the next scheduled regular arrival
    const double inf = std::numeric_limits<double>::infinity();
    double next_pump =
        (config.pump_mode == PumpMode::Regular && params.J > 0.0) ? 1.0 / params.J : inf;

    auto blocked_fraction_excessive = [&]() {
        return pump_arrivals >= 1000 && blocked * 1000 > pump_arrivals;
    };

    for (;;) {
        const double r_stim = double(s.m + 1) * double(s.n2);
        const double r_spont = params.gamma * double(s.n2);
        const double r_det = params.alpha * double(s.m);
        const double stoch = r_stim + r_spont + r_det;

        double te;
        bool is_pump = false;
        EventType ev = EventType::Pump;

        if (config.pump_mode == PumpMode::Poissonian) {
            const double total = params.J + stoch;
            if (total <= 0.0) break; // dark absorbing state, nothing more happens
            te = s.t + rng.exponential(total);
            if (te > T) break;
            double u = rng.uniform() * total;
            if (u < params.J) {
                is_pump = true;
            } else {
                u -= params.J;
                if (u < r_stim) ev = EventType::Stimulated;
                else if (u < r_stim + r_spont) ev = EventType::Spontaneous;
                else ev = s.m > 0 ? EventType::Detection : EventType::Spontaneous;
            }
        } else {
            te = stoch > 0.0 ? s.t + rng.exponential(stoch) : inf;
            if (next_pump <= te) { // pump wins ties; clock re-drawn next turn
                te = next_pump;
                if (te > T) break;
                is_pump = true;
                ++pump_k;
                next_pump = double(pump_k) / params.J;
            } else {
                if (te > T) break;
                const double u = rng.uniform() * stoch;
                if (u < r_stim) ev = EventType::Stimulated;
                else if (u < r_stim + r_spont) ev = EventType::Spontaneous;
                else ev = s.m > 0 ? EventType::Detection : EventType::Spontaneous;
            }
        }

        emit_until(te);

        const bool in_window = te > config.burn_in;
        if (!initial_captured && in_window) {
            tr.m_initial = s.m;
            tr.n2_initial = s.n2;
            initial_captured = true;
        }

        if (is_pump) {
            ++pump_arrivals;
            if (s.n2 >= N) {
                ++blocked;
                if (in_window) ++tr.event_counts.blocked_pump;
                if ((blocked & 0xFFFull) == 0 && blocked_fraction_excessive()) break;
            } else {
                ++s.n2;
                if (in_window) ++tr.event_counts.pump;
            }
        } else {
            switch (ev) {
                case EventType::Stimulated:
                    --s.n2;
                    ++s.m;
                    if (in_window) ++tr.event_counts.stimulated;
                    break;
                case EventType::Spontaneous:
                    --s.n2;
                    if (in_window) ++tr.event_counts.spontaneous;
                    break;
                case EventType::Detection:
                    --s.m;
                    if (in_window) {
                        ++tr.event_counts.detection;
                        if (config.record_detections) tr.detections.push_back(te);
                    }
                    break;
                case EventType::Pump:
                    break; // unreachable
            }
        }
        s.t = te;
    }

    if (blocked_fraction_excessive())
        throw std::runtime_error(
            "pump blocked at n2 = N for " + std::to_string(blocked) + " of " +
            std::to_string(pump_arrivals) +
            " arrivals (> 0.1%); the fixed-N model is invalid at these parameters");

    emit_until(T);
    if (!initial_captured) {
        tr.m_initial = s.m;
        tr.n2_initial = s.n2;
    }
    tr.m_final = s.m;
    tr.n2_final = s.n2;
    return tr;
}

} // namespace twolevel
