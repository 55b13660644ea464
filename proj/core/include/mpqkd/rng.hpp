#pragma once

#include <cstdint>

namespace mpqkd {

// Deterministic random streams for block-parallel simulation.
//
// Every stream is keyed by (seed, purpose, block). Draws depend only on the
// key and on the call sequence within the stream, never on thread scheduling,
// so a simulation split into blocks produces identical output for any worker
// count. Streams for distinct keys are derived through a SplitMix64 chain,
// which is also how the xoshiro state is filled.
struct StreamRng {
    // Purpose tags keep independent concerns on independent streams so one
    // pass can be replayed without replaying the others.
    enum Purpose : std::uint64_t {
        trajectory = 0x74726a00,
        detection = 0x64657400,
        generic = 0x67656e00,
    };

    StreamRng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t block);

    std::uint64_t next_u64();

    // Uniform double in [0, 1) with 53 random bits.
    double uniform();

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    bool bernoulli(double p);

    // Standard normal via the polar method. Pairs are cached, so draw counts
    // stay deterministic per stream.
    double normal();

    // Exact Poisson sampling by multiplication of uniforms. Large means are
    // split into chunks of at most 60 so the e^-lambda threshold never
    // underflows. Cost grows linearly with lambda; intended for lambda up to
    // a few thousand.
    std::uint64_t poisson(double lambda);

  private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace mpqkd
