#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace parsrec {

// splitmix64 step; used to derive per-stage seeds from one root seed so that
// every pipeline stage draws from an independent, reproducible stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed for a named stage (tag) and index under a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = root ^ 0xA0761D6478BD642FULL;
    for (unsigned char c : tag) {
        h ^= c;
        splitmix64(h);
        h = (h << 7) | (h >> 57);
    }
    h ^= index * 0x8EBC6AF09C88C6E3ULL;
    std::uint64_t s = h;
    return splitmix64(s);
}

// Unbiased draw in [0, n) by rejection. Pinned algorithm: results do not
// depend on the standard library's distribution implementations.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = gen();
    } while (v >= limit);
    return v % n;
}

inline double uniform_real(std::mt19937_64& gen, double lo = 0.0, double hi = 1.0) {
    // 53-bit mantissa draw
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

template <typename T>
void shuffle_pinned(std::vector<T>& v, std::mt19937_64& gen) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(gen, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace parsrec
