// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "numerics/random.hpp"

#include <cmath>

namespace proxyrestore::numerics {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kMixA = 0xbf58476d1ce4e5b9ull;
constexpr std::uint64_t kMixB = 0x94d049bb133111ebull;

// SplitMix64 finalizer (Vigna / Steele-Lea-Flood).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * kMixA;
    z = (z ^ (z >> 27)) * kMixB;
    return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t substream_id)
    : seed_(seed), substream_id_(substream_id) {
    key_ = mix64(mix64(seed + kGolden) ^ mix64(substream_id * kMixA + kMixB));
}

RandomStream RandomStream::substream(std::uint64_t id) const {
    RandomStream child;
    child.seed_ = seed_;
    child.substream_id_ = id;
    // Derive from the parent key, not (seed, id), so nested derivations
    // form a tree rather than aliasing across levels.
    child.key_ = mix64(key_ ^ mix64(id * kMixB + kGolden));
    child.counter_ = 0;
    return child;
}

std::uint64_t RandomStream::next_u64() {
    return mix64(key_ + (++counter_) * kGolden);
}

std::uint64_t RandomStream::mix(std::uint64_t x) { return mix64(x); }

double RandomStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_unit_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::next_gaussian() {
    const double u1 = next_unit_pos();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

void RandomStream::fill_gaussian(std::span<double> out) {
    const std::size_t n = out.size();
    std::size_t i = 0;
    while (i + 1 < n) {
        const double u1 = next_unit_pos();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        out[i++] = r * std::cos(a);
        out[i++] = r * std::sin(a);
    }
    if (i < n) out[i] = next_gaussian();
}

}  // namespace proxyrestore::numerics
