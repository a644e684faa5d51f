#pragma once

#include <cmath>
#include <cstdint>

namespace twolevel {

/// SplitMix64 with a hashed (seed, stream) start state.
///
/// Draws walk the canonical 2^64 counter sequence through the SplitMix64
/// finalizer, which is bit-exact on every platform.  Distinct (seed, stream)
/// pairs start at pseudo-randomly separated positions of the same cycle; for
/// s streams of t draws each, the pairwise overlap probability is about
/// s^2 t / 2^64.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(finalize(seed + GOLDEN * finalize(stream + GOLDEN))) {}

    std::uint64_t next() { return finalize(state_ += GOLDEN); }

    /// Uniform double strictly inside (0, 1): the 53-bit draw is offset by
    /// half an ulp, so log(uniform()) is always finite and waiting times are
    /// always positive.
    double uniform() { return double(next() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    /// Exponential waiting time for a process with the given rate (> 0).
    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ull;

    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace twolevel
