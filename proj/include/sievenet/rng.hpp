#pragma once

#include <cstdint>
#include <random>

namespace sievenet {

// SplitMix64 step; used only to derive well-mixed seeds for std engines.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and up to two stream ids.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= a * 0xD1B54A32D192ED03ULL;
    z ^= splitmix64(s);
    s ^= b * 0x8CB92BA72F3D8DD7ULL;
    z ^= splitmix64(s);
    return z;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    std::uint64_t s = seed;
    // burn a few splitmix outputs so nearby seeds land far apart
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    return std::mt19937_64(seq);
}

}  // namespace sievenet
