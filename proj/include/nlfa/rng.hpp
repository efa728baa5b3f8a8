#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nlfa {

// Seeded draws below avoid std::uniform_*_distribution and std::shuffle on
// purpose: their output is implementation-defined, and fold assignments and
// model initializations must replay identically everywhere.

/// Uniform draw in (0, 1] from the top 53 bits of a mt19937_64 word.
inline double unit_open(std::mt19937_64& gen) {
    return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). bound must be > 0.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound) {
    return gen() % bound;
}

/// In-place Fisher-Yates shuffle with explicit bounded draws.
template <typename T>
void shuffle_portable(std::vector<T>& v, std::mt19937_64& gen) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded(gen, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace nlfa
