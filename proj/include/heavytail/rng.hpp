// Counter-based random number generation for reproducible parallel Monte Carlo.
#pragma once

#include <cstdint>

namespace heavytail {

namespace detail {

// SplitMix64 finalizer; full-period bijective mix of a 64-bit word.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based stream: output i is a pure function of (seed, stream, i),
/// so any number of streams can be derived from one master seed and consumed
/// in parallel without coordination.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
        : key_(detail::mix64(seed ^ detail::mix64(stream_id * 0xda942042e4dd58b5ull))) {}

    std::uint64_t next_u64() noexcept {
        return detail::mix64(key_ + counter_++ * 0x9e3779b97f4a7c15ull);
    }

    /// Uniform draw in (0,1); never returns exactly 0 or 1, so it is safe
    /// to feed into quantile functions.
    double next_uniform() noexcept {
        // 53 random bits, offset by half an ulp into the open interval
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t counter() const noexcept { return counter_; }

    /// Child stream for a worker; independent of draws taken from this one.
    RngStream derive(std::uint64_t worker_id) const noexcept {
        return RngStream(key_, 0x517cc1b727220a95ull ^ worker_id);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace heavytail
