#pragma once

#include <cstdint>
#include <random>

namespace logifit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Deterministic independent stream: (seed, index) fully determines the
/// sequence, so parallel consumers can each own a stream and results do not
/// depend on scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed ^ (index * 0xD1B54A32D192ED03ULL);
        std::uint32_t init[8];
        for (int i = 0; i < 8; i += 2) {
            std::uint64_t w = detail::splitmix64(s);
            init[i] = static_cast<std::uint32_t>(w);
            init[i + 1] = static_cast<std::uint32_t>(w >> 32);
        }
        std::seed_seq seq(init, init + 8);
        engine_.seed(seq);
    }

    std::mt19937_64& engine() { return engine_; }

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }
    double exponential(double rate) {
        return std::exponential_distribution<double>(rate)(engine_);
    }
    double normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stable derivation of sub-seeds for nested stochastic stages.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (tag * 0x9E3779B97F4A7C15ULL);
    return detail::splitmix64(s);
}

} // namespace logifit
