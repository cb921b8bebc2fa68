#pragma once

#include <cstdint>
#include <random>

namespace garsamp {

// Seeded uniform and gaussian streams. Replication r of a run seeded with s
// uses split(r), i.e. seed s + r.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double gaussian(double mean = 0.0, double sd = 1.0) {
        return mean + sd * normal_(engine_);
    }

    RandomSource split(std::uint64_t index) const { return RandomSource(seed_ + index); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace garsamp
