#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace overdraft {

// splitmix64 finalizer; full avalanche, zero state.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Order-sensitive combiner for seeding permutations and the block beacon.
constexpr std::uint64_t hash64(std::uint64_t a, std::uint64_t b) noexcept
{
    return mix64(a ^ mix64(b));
}

constexpr std::uint64_t hash64(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept
{
    return hash64(hash64(a, b), c);
}

// Counter-style splitmix64 stream. Substreams are derived from (seed, index),
// never from generator state, so a run partitioned across workers draws the
// same numbers as a sequential one.
class rng_stream
{
public:
    explicit rng_stream(std::uint64_t seed) noexcept : state_(seed) {}

    static rng_stream substream(std::uint64_t seed, std::uint64_t index) noexcept
    {
        return rng_stream(mix64(seed ^ mix64(index)));
    }

    std::uint64_t next_u64() noexcept
    {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return next_unit() < p; }

    // Uniform in [0, bound) by rejection; bound > 0.
    std::uint64_t next_below(std::uint64_t bound) noexcept
    {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

private:
    std::uint64_t state_;
};

// In-place Fisher-Yates driven by the given stream.
template <typename T>
void shuffle(std::span<T> items, rng_stream& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace overdraft
