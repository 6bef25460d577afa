#pragma once

#include <cstdint>

namespace fqdist {

/// SplitMix64. This is the project's only source of randomness; the algorithm
/// is fixed so that every seeded artifact is reproducible byte for byte.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound) by rejection; bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t limit = ~0ull - (~0ull % bound + 1) % bound;
        std::uint64_t r;
        do {
            r = next();
        } while (r > limit);
        return r % bound;
    }

    /// Derives an independent stream: feed tags through the mix function.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
        SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ull * (tag + 1)));
        return g.next();
    }

private:
    std::uint64_t state_;
};

} // namespace fqdist
