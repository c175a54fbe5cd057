#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gapforge {

/// Deterministic counter-based generator with independent substreams.
///
/// The state is derived from a (seed, stream) pair by SplitMix64-style
/// mixing, so streams for distinct ids are statistically independent and
/// generation order across streams does not matter. All distributions are
/// implemented here rather than via <random> so that output is identical
/// across standard library implementations.
class Rng {
public:
    static constexpr std::string_view kGeneratorName = "splitmix64-streams-v1";

    Rng(uint64_t seed, uint64_t stream)
        : state_(derive(seed, stream)) {}

    explicit Rng(uint64_t seed) : Rng(seed, 0) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform on [0, bound), unbiased via rejection.
    uint64_t next_below(uint64_t bound) {
        // Rejection on the top of the range keeps the draw unbiased.
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform01_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool coin() { return (next_u64() >> 63) != 0; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform01_open();
        double v = uniform01();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform01_open()); }

private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static uint64_t derive(uint64_t seed, uint64_t stream) {
        uint64_t z = mix(seed + 0x9E3779B97F4A7C15ull);
        z = mix(z ^ (stream * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull));
        return z;
    }

    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace gapforge
