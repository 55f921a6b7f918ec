#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mg {

// All randomness flows through mt19937_64 streams keyed by explicit integer
// ids. Draw helpers below avoid std::uniform_*_distribution on purpose: the
// standard leaves their algorithms implementation-defined, and regression
// values frozen in the tests must not move when the standard library does.
using RngStream = std::mt19937_64;

inline RngStream make_stream(std::uint64_t seed, std::initializer_list<std::uint32_t> ids) {
    std::vector<std::uint32_t> words;
    words.reserve(ids.size() + 2);
    words.push_back(static_cast<std::uint32_t>(seed & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    words.insert(words.end(), ids.begin(), ids.end());
    std::seed_seq seq(words.begin(), words.end());
    return RngStream(seq);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(RngStream& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(RngStream& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n) by rejection, bias-free.
inline std::uint64_t uniform_index(RngStream& rng, std::uint64_t n) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % n;
}

}  // namespace mg
