#pragma once

#include <cstdint>

namespace mfuq {

/**
 * Counter-based SplitMix64 stream.
 *
 * Draw i of stream (seed, stream) is mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
 * with key = mix64(seed ^ mix64(stream)). The output depends only on
 * (seed, stream, i), so streams are reproducible across platforms and can
 * be split without shared state.
 *
 * uniform() returns (x >> 11) * 2^-53 in [0, 1). normal() uses the cosine
 * branch of Box-Muller and consumes two draws.
 */
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    double uniform();
    double normal();

    std::uint64_t position() const { return counter_; }

    static std::uint64_t mix64(std::uint64_t z);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mfuq
