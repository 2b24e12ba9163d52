#pragma once

#include <cstdint>

namespace harvest {

using Seed = std::uint64_t;

/// Stateless seed derivation: SplitMix64 finalizer applied to a combination
/// of (base, index, stream). Any subset of path indices reproduces the same
/// per-path seeds regardless of evaluation order or worker count.
constexpr Seed mix_seed(Seed base, std::uint64_t index, std::uint64_t stream = 0) noexcept {
    auto splitmix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return splitmix(splitmix(splitmix(base) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

}  // namespace harvest
