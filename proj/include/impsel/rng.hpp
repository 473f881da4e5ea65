#pragma once

#include <bit>
#include <cstdint>

namespace impsel {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGoldenGamma);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-style seed derivation: substream `index` of a master seed gets its
// own well-mixed state, so trial results do not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    std::uint64_t t = h ^ (index * 0xda942042e4dd58b5ULL + 1);
    return splitmix64(t);
}

// xoshiro256** with integer-only helpers. All sampling in this project flows
// through this class; std:: distributions are avoided because their output is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    static Rng substream(std::uint64_t master, std::uint64_t index) {
        return Rng(derive_seed(master, index));
    }

    std::uint64_t next() {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1) on the 2^-53 grid.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, bound); bound >= 1. Lemire's method.
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    // Exact Bernoulli(num/den) using only integer draws.
    bool bernoulli_ratio(std::uint64_t num, std::uint64_t den) {
        if (num == 0) return false;
        if (num >= den) return true;
        return below(den) < num;
    }

private:
    std::uint64_t state_[4];
};

}  // namespace impsel
