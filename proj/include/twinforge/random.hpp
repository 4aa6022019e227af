#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace twinforge {

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Maps the top 53 bits of a word onto [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stateless generator: every draw is a pure function of its key, so
/// streams can be produced in any order or in parallel with identical bits.
class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

    constexpr CounterRng derive(std::uint64_t label) const noexcept {
        CounterRng child(0);
        child.key_ = mix64(key_ ^ mix64(label + 0x632be59bd9b4e019ULL));
        return child;
    }

    constexpr std::uint64_t bits(std::uint64_t counter, std::uint64_t stream = 0) const noexcept {
        return mix64(mix64(key_ ^ counter) + stream * 0xd1b54a32d192ed03ULL);
    }

    constexpr double uniform(std::uint64_t counter, std::uint64_t stream = 0) const noexcept {
        return to_unit(bits(counter, stream));
    }

    /// Standard normal via Box-Muller on streams (2s, 2s+1).
    double normal(std::uint64_t counter, std::uint64_t stream = 0) const noexcept {
        const double u1 = 1.0 - uniform(counter, 2 * stream);  // (0, 1]
        const double u2 = uniform(counter, 2 * stream + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
};

/// Sequential SplitMix64 stream for algorithms that consume draws in order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() noexcept { return to_unit(next()); }

private:
    std::uint64_t state_;
};

} // namespace twinforge
