#pragma once

#include <cmath>
#include <cstdint>

namespace sdbm {

// Seedable, splittable RNG. All stochastic operations take one of these
// explicitly so experiments are bit-reproducible. Uniform and normal draws
// are generated here (not via std distributions) so that results do not
// depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(mix(seed)) {
        if (state_ == 0) state_ = 0x9e3779b97f4a7c15ULL;
    }

    // Derives an independent stream. Splitting the same parent with the
    // same id always yields the same child.
    Rng split(std::uint64_t stream_id) const {
        return Rng(mix(seed_ ^ mix(stream_id + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        // xorshift64*
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545f4914f6cdd1dULL;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sdbm
