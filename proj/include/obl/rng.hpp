#pragma once

#include <cstdint>

namespace obl {

// xorshift64* generator: 64 bits of state, period 2^64 - 1.  Deterministic
// across platforms, which matters more here than statistical strength; every
// randomized component takes an explicit seed so runs can be replayed.
class Xorshift64Star {
public:
    explicit constexpr Xorshift64Star(uint64_t seed) noexcept
        : state_(seed != 0 ? seed : 0x9e3779b97f4a7c15ull) {}

    constexpr uint64_t next() noexcept {
        uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // Exact uniformity only for power-of-two bounds; callers that rely on it
    // (ORAM leaf draws) mask instead of calling this.
    constexpr uint64_t next_below(uint64_t bound) noexcept {
        return next() % bound;
    }

private:
    uint64_t state_;
};

}  // namespace obl
