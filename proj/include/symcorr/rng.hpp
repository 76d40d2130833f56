#pragma once

// Deterministic PRNG used for every random decision in the project.
//
// Algorithm: xoshiro256++ 1.0 (Blackman & Vigna), state expanded from a
// 64-bit seed with SplitMix64. Streams are derived by folding a path of
// 64-bit ids into the seed with SplitMix64 before state expansion, so
// (seed, pair_id, ...) always maps to the same stream regardless of how
// many other streams were drawn from. Integer outputs are bit-exact across
// platforms; doubles are built from the top 53 bits.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace symcorr {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    // Stream for (seed, path...): each path id is folded into the seed via
    // SplitMix64 before state expansion.
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t sm = seed;
        std::uint64_t folded = detail::splitmix64(sm);
        for (std::uint64_t id : path) {
            sm = folded ^ id;
            folded = detail::splitmix64(sm);
        }
        return Rng(folded);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n). Multiply-shift bound (bias < n / 2^64).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    int uniform_int(int lo, int hi_exclusive) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi_exclusive - lo)));
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_{};
};

// Stream tags so independent consumers of one run seed never collide.
namespace stream {
constexpr std::uint64_t kGeometryA = 0x01;
constexpr std::uint64_t kGeometryB = 0x02;
constexpr std::uint64_t kAppearanceA = 0x03;
constexpr std::uint64_t kAppearanceB = 0x04;
constexpr std::uint64_t kWeightInit = 0x05;
constexpr std::uint64_t kEpochShuffle = 0x06;
constexpr std::uint64_t kBatchSample = 0x07;
constexpr std::uint64_t kEval = 0x08;
}  // namespace stream

}  // namespace symcorr
