#pragma once

#include <cstdint>
#include <random>

namespace pshlab {

// Reproducible uniform doubles. The engine is std::mt19937_64 (fully specified
// by the standard, so identical across platforms); the double mapping is our
// own 53-bit mantissa scaling because uniform_real_distribution is not
// portable across standard library implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // deterministic derived seed for batch b (splitmix64 mixing)
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t batch) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (batch + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace pshlab
