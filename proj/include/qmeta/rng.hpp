#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qmeta {

// mt19937_64 with fixed draw algorithms. The standard <random> distributions
// are implementation-defined, which would make traces differ across standard
// libraries; spelling the transforms out keeps runs reproducible per seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. No second-value caching, so the draw
    // sequence is a pure function of the engine state.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // +1 or -1 with equal probability.
    double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

    // Independent stream derived from this generator's seed and a tag.
    Rng child(std::uint64_t tag) const {
        return Rng(splitmix64(seed_ ^ splitmix64(tag + 0x9e3779b97f4a7c15ull)));
    }

  private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace qmeta
