#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace densemark {

/// Deterministic random source. mt19937_64 has a fully specified sequence and
/// the uniform/gaussian mappings below avoid the implementation-defined
/// std:: distributions, so identical seeds give identical draws on any
/// platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Inclusive integer range.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(gen_() % static_cast<uint64_t>(hi - lo + 1));
    }

    /// Standard normal via Box-Muller (two fresh uniforms per call, no cache).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    /// splitmix64-style mixing for derived child seeds; lets parallel workers
    /// draw from independent streams keyed by stable sample indices.
    static uint64_t derive(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
        uint64_t z = seed;
        for (uint64_t salt : {a + 0x9e3779b97f4a7c15ULL, b + 0xbf58476d1ce4e5b9ULL,
                              c + 0x94d049bb133111ebULL}) {
            z += salt;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            z = z ^ (z >> 31);
        }
        return z;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace densemark
