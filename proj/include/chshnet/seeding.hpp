#pragma once

#include <cstdint>

namespace chshnet {

// SplitMix64 output function (Steele/Lea/Vigna). Used as a mixing
// finalizer for seed derivation; keeps every derived stream a pure
// function of (base, tag).
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed splitting rule used everywhere a child seed is needed:
//   derive_seed(base, tag) = splitmix64(base + (tag + 1) * golden)
// Context seeds use tag = context index 0..3 in the order
// (1,1),(1,2),(2,1),(2,2); sweep trials nest two derivations,
// first tag = hidden size n (the value), then tag = repeat index.
inline uint64_t derive_seed(uint64_t base, uint64_t tag) {
    return splitmix64(base + (tag + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace chshnet
