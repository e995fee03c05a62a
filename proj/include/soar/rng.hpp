#pragma once

#include <cstdint>
#include <initializer_list>

#include "soar/error.hpp"

// Pinned random number generation.
//
// Every random choice in this library flows through the SplitMix64 stream
// below, so a (seed, purpose-tag) pair fully determines all draws on any
// platform. The algorithm is frozen; test vectors live in
// tests/test_rng.cpp and in README.md.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   output = z ^ (z >> 31)
//
// bounded(n) rejects raw draws below 2^64 mod n and returns draw % n,
// consuming a variable number of raw outputs. uniform01() maps the top
// 53 bits of one raw output to [0, 1).

namespace soar::rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += kGamma;
        return mix64(state_);
    }

    // Uniform integer in [0, n). Rejection from below keeps the result
    // unbiased for every n.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw ParameterError("bounded draw requires n > 0");
        const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform real in [-a, a].
    double symmetric(double a) {
        return (uniform01() * 2.0 - 1.0) * a;
    }

private:
    std::uint64_t state_;
};

// Folds a word list into one stream seed. Used to split independent
// streams from one user seed, e.g. derive({seed, strategy_tag}) or
// derive({run_seed, sample_id, step}).
inline constexpr std::uint64_t derive(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0xA0761D6478BD642FULL;
    for (std::uint64_t w : words) h = mix64((h ^ w) + kGamma);
    return h;
}

// Stream tags. Frozen: changing one silently changes every artifact
// produced from the same seed.
inline constexpr std::uint64_t kTagObjectAware = 1;
inline constexpr std::uint64_t kTagRatioX = 2;
inline constexpr std::uint64_t kTagLeaky3d = 3;
inline constexpr std::uint64_t kTagRandom = 4;
inline constexpr std::uint64_t kTagTube = 5;
inline constexpr std::uint64_t kTagBlock = 6;
inline constexpr std::uint64_t kTagSynthPlacement = 101;
inline constexpr std::uint64_t kTagSynthNoise = 102;
inline constexpr std::uint64_t kTagSynthJitter = 103;
inline constexpr std::uint64_t kTagModelInit = 201;
inline constexpr std::uint64_t kTagTrainMask = 202;

} // namespace soar::rng
