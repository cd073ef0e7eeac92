#pragma once

#include <cstdint>

namespace nearprobe {

// splitmix64; compact counter-style generator. Per-sample streams are keyed
// deterministically from (seed, state index, sample index) so Monte-Carlo
// results do not depend on the thread count.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline uint64_t mix_key(uint64_t seed, uint64_t a, uint64_t b) {
    SplitMix64 s(seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xD1B54A32D192ED03ull));
    s.next();
    return s.next();
}

}  // namespace nearprobe
