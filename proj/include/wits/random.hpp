#pragma once

#include "wits/types.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace wits {

using Rng = std::mt19937_64;

/// splitmix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and a stream key. Stable across
/// versions: the mixing is fixed and does not depend on the standard library.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) noexcept {
    return mix64(mix64(parent) ^ (key * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

/// FNV-1a hash of a string, for keying seed streams by name.
constexpr std::uint64_t hash_name(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform integer in [0, bound) by rejection; independent of the standard
/// library's distribution implementation.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

/// In-place Fisher-Yates shuffle.
template <class T>
void shuffle_in_place(std::span<T> values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(values[i - 1], values[j]);
    }
}

/// Uniform random subset of {0..n-1} of the given size, in random order.
inline std::vector<Index> sample_indices(Index n, Index size, Rng& rng) {
    if (size > n || size < 0) throw InvalidArgument("sample_indices: size exceeds population");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < size; ++i) {
        const auto j = i + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(size));
    return idx;
}

/// Rows of `s` selected by `idx`, in that order.
inline Sample take_rows(const Sample& s, const std::vector<Index>& idx) {
    Sample out(static_cast<Index>(idx.size()), s.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = s.row(idx[i]);
    return out;
}

}  // namespace wits
