#pragma once

#include <cstdint>

namespace ssbnn {

/// Counter-based deterministic generator. Output depends only on
/// (seed, stream, draw index), so copies replay the same draws and
/// per-layer streams stay independent under reordering.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream), counter_(0) {}

    std::uint64_t next_u64() { return mix(base() + counter_++ * kPhi); }

    /// Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t counter() const { return counter_; }
    void set_counter(std::uint64_t c) { counter_ = c; }

private:
    static constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t base() const {
        return mix(seed_ + kPhi) ^ mix(stream_ * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

}  // namespace ssbnn
