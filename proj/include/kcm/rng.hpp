#pragma once

#include <array>
#include <cstdint>

namespace kcm {

/// SplitMix64 output function. Used for seeding and for deriving independent
/// per-replicate seeds from a master seed; not used as a bulk generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for replicate `index` of the stream rooted at `master`.
/// O(1), independent of index order, so replicates can be scheduled on any
/// worker in any order and still see the same randomness.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    return splitmix64(state);
}

/// xoshiro256++ (Blackman & Vigna). Small, fast, and defined purely over
/// uint64 arithmetic, so streams are bit-identical across platforms.
class xoshiro256pp {
public:
    explicit xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform integer in [0, bound) without modulo bias (Lemire rejection).
    std::uint64_t next_below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0ULL - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in the half-open interval (0, 1].
    /// Strictly positive so it can feed inverse-CDF tail comparisons.
    double next_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int r) {
        return (x << r) | (x >> (64 - r));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace kcm
