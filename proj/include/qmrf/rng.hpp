#pragma once

#include <cmath>
#include <cstdint>

namespace qmrf {

// Deterministic splittable RNG. std:: distributions are implementation
// defined, so uniform/normal draws are generated here to keep outputs
// byte-identical across builds and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {
        // decorrelate trivially related seeds
        next_u64();
        next_u64();
    }

    // Independent child stream; mixing is order-free so streams derived
    // from (seed, ids...) never depend on call sequence.
    template <class... Ids>
    static Rng stream(std::uint64_t seed, Ids... ids) {
        std::uint64_t h = seed;
        ((h = mix(h ^ mix(static_cast<std::uint64_t>(ids) + 0x517cc1b727220a95ull))), ...);
        return Rng(h);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        return n ? next_u64() % n : 0;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; caches the second deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace qmrf
