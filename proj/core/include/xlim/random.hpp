#pragma once

#include <cstdint>

namespace xlim {

/// SplitMix64 finalizer. Used to derive independent per-cycle seeds from one
/// top-level seed so that ensemble members do not depend on execution order.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix_seed(mix_seed(seed) ^ (index + 1) * 0xd1b54a32d192ed03ULL);
}

}  // namespace xlim
