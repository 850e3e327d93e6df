#pragma once

#include <cstdint>
#include <string_view>

namespace harvest {

/// Finalizer from MurmurHash3; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb3f99ee6e7f1ULL;
    x ^= x >> 33;
    return x;
}

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded 64-bit string hash: FNV-1a over the bytes, seed folded into the
/// offset basis, avalanche by mix64. Stable across platforms and runs.
constexpr std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed + 0x9e3779b97f4a7c15ULL);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h ^ (static_cast<std::uint64_t>(bytes.size()) << 1));
}

}  // namespace harvest
