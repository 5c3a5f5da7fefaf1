#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace causal {

// Deterministic seed derivation. Every stochastic component draws from a
// seed obtained by mixing a base seed with a stream tag, so adding or
// reordering consumers never perturbs the draws of existing ones.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
    return derive_seed(base, fnv1a64(tag));
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a) {
    return derive_seed(derive_seed(base, tag), a);
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a, uint64_t b) {
    return derive_seed(derive_seed(derive_seed(base, tag), a), b);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace causal
