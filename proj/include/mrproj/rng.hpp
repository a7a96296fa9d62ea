#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

namespace mrproj {

// splitmix64 finalizer; used both as a mixer and as the generator step.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based RNG stream: the state is derived from (seed, stream), so
// parallel workers can own independent, reproducible streams.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix64(seed ^ mix64(stream + 0x5851f42d4c957f2dULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return state_ = mix64(state_); }

    // uniform on [0,1)
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // uniform on {0,...,n-1}
    std::uint64_t uniform_int(std::uint64_t n) {
        // modulo bias is < 2^-53 for the n used here
        return (*this)() % n;
    }

    // standard normal via Box-Muller; consumes exactly two uniforms
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = std::numeric_limits<double>::min();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace mrproj
