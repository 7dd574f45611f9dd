#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace orddiff {

// splitmix64, used for seeding and for deriving named substreams.
inline uint64_t splitmix64(uint64_t &state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(const void *data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char *p = static_cast<const unsigned char *>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

// xoshiro256** with named substream derivation. Every random draw in the
// project flows through this class so one root seed pins a whole run.
// Substreams are derived from the seed, not the draw position, so module
// construction order cannot perturb other modules' streams.
class Rng {
  public:
    explicit Rng(uint64_t seed) : seed_(seed) {
        uint64_t s = seed;
        for (auto &w : s_) w = splitmix64(s);
    }

    Rng sub(std::string_view name) const { return Rng(seed_ ^ fnv1a64(name)); }
    Rng sub(uint64_t idx) const {
        uint64_t s = seed_ + 0x9e3779b97f4a7c15ULL * (idx + 1);
        return Rng(splitmix64(s));
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; the pair's second half is cached so
    // draw counts stay deterministic.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    uint64_t seed() const { return seed_; }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t seed_ = 0;
    uint64_t s_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace orddiff
