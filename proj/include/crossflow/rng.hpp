#pragma once

#include <cmath>
#include <cstdint>

#include "params.hpp"

namespace crossflow {

// SplitMix64: tiny, fast, and splittable by construction. One instance per
// particle keeps parallel propagation reproducible and schedule-independent.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // Uniform on (0, 1]: 53-bit mantissa, never 0, so log() is always finite.
    double next_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Substream for particle `index` under a master seed.
inline SplitMix64 particle_stream(std::uint64_t master_seed, std::uint64_t index) {
    return SplitMix64{mix64(master_seed ^ mix64(0xA0761D6478BD642FULL * (index + 1)))};
}

// Gap ~ Exponential(lambda_total); lane 1 with probability lambda1/lambda.
// Draw order (gap, then lane) is part of the reproducibility contract.
inline ArrivalEvent sample_arrival(SplitMix64& rng, const IntersectionParams& p) {
    double gap = -std::log(rng.next_unit()) / p.lambda_total();
    int lane = rng.next_unit() <= p.lane_prob(1) ? 1 : 2;
    return ArrivalEvent{gap, lane};
}

}  // namespace crossflow
