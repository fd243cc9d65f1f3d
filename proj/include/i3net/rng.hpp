#pragma once

#include <cstdint>
#include <string_view>

namespace i3net {

// Counter-based PRNG: every draw is a pure function of (key, stream, counter),
// so parallel consumers with per-index counters reproduce the same sequence in
// any order and on any platform. Mixing is splitmix64-style; no global state.

inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

class Rng {
public:
    Rng() = default;
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : key_(mix64(seed ^ mix64(stream))) {}

    // Independent deterministic substream, e.g. rng.stream("init").
    Rng stream(std::string_view name) const { return Rng(key_, fnv1a64(name)); }
    Rng stream(std::uint64_t n) const { return Rng(key_, mix64(n)); }

    std::uint64_t next_u64() { return mix64(key_ + 0x632be59bd9b4e019ull * ++counter_); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), n > 0. Multiply-shift, no rejection.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    std::uint64_t state_counter() const { return counter_; }
    std::uint64_t state_key() const { return key_; }
    void restore(std::uint64_t key, std::uint64_t counter) {
        key_ = key;
        counter_ = counter;
    }

private:
    std::uint64_t key_ = 0x9e3779b97f4a7c15ull;
    std::uint64_t counter_ = 0;
};

} // namespace i3net
