#pragma once

#include <cstdint>
#include <random>

namespace facf {

/// Portable seeded generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; doubles are formed from the top 53 bits
/// of each draw, so streams agree across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do
            v = engine_();
        while (v >= limit);
        return v % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace facf
