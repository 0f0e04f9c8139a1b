#pragma once

#include <cstdint>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>

namespace mbandit {

/// Pseudo-random engine used everywhere in the library.
///
/// Boost's mt19937_64 and its distributions produce the same sequence on every
/// platform, which std:: distributions do not guarantee. All stochastic code
/// takes an `Rng&` owned by the caller.
using Rng = boost::random::mt19937_64;

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over a label, for naming streams.
constexpr std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derive an independent child seed from a parent seed, a stream label and an index.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view label,
                                    std::uint64_t index = 0) {
    return mix64(mix64(parent ^ hash_label(label)) + mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t parent, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_seed(parent, label, index));
}

/// Uniform draw in [0, 1).
double uniform01(Rng& rng);

}  // namespace mbandit
