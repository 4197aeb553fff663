// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

namespace proxyrestore::numerics {

// Counter-based splittable random stream built on the SplitMix64 finalizer.
// A stream is identified by (seed, substream_id); the i-th output is a pure
// function of (seed, substream_id, i), so replications scheduled on any
// number of threads see the same sequences. Child streams derived with
// substream() are statistically independent of the parent and of each other.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t substream_id = 0);

    // Derives an independent child stream. Derivation is hierarchical:
    // children of distinct parents never collide in practice.
    RandomStream substream(std::uint64_t id) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t substream_id() const { return substream_id_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double next_unit();

    // Uniform on (0, 1], safe as a log() argument.
    double next_unit_pos();

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double next_gaussian();

    // Fills the span pairwise so large normal blocks cost one Box-Muller
    // per two values. Consumption is a pure function of out.size().
    void fill_gaussian(std::span<double> out);

    std::uint64_t mix(std::uint64_t x);  // exposed for tests

  private:
    RandomStream() = default;

    std::uint64_t seed_ = 0;
    std::uint64_t substream_id_ = 0;
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace proxyrestore::numerics
