#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace zpdes {

// mt19937_64 output is fully specified by the standard; the helpers below
// avoid the implementation-defined std distributions so traces are
// reproducible across toolchains.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over a string, used for stream tags and content hashes.
constexpr std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Child seed for a named stream: splitmix64(parent ^ fnv1a(tag)).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag)
{
    return splitmix64(parent ^ fnv1a(tag));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n), n > 0.
inline std::size_t uniform_index(std::size_t n, Rng& rng)
{
    const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    return i < n ? i : n - 1;
}

inline bool bernoulli(double p, Rng& rng)
{
    return uniform01(rng) < p;
}

} // namespace zpdes
