#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hotelalign {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Seed for a labeled substream. Consumers never share a generator, so adding
// a new label leaves every existing stream untouched.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0)
{
    return Rng(derive_seed(seed, label, index));
}

// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace hotelalign
