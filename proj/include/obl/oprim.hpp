#pragma once

#include <cstdint>

#include "obl/trace.hpp"

namespace obl {

using word = uint64_t;

// Condition word that is all-ones (taken) or all-zeros (not taken) in every
// bit.  The factory and the comparison helpers are the only producers, so the
// invariant holds by construction; raw() exists for composing byte masks.
class Mask {
public:
    constexpr Mask() = default;

    static constexpr Mask from_bool(bool b) noexcept {
        return Mask(b ? ~uint64_t{0} : uint64_t{0});
    }
    // Caller promises bits is 0 or ~0.
    static constexpr Mask from_bits(uint64_t bits) noexcept { return Mask(bits); }

    constexpr uint64_t bits() const noexcept { return bits_; }
    constexpr bool as_bool() const noexcept { return bits_ != 0; }

    friend constexpr Mask operator&(Mask a, Mask b) noexcept {
        return Mask(a.bits_ & b.bits_);
    }
    friend constexpr Mask operator|(Mask a, Mask b) noexcept {
        return Mask(a.bits_ | b.bits_);
    }
    friend constexpr Mask operator~(Mask a) noexcept { return Mask(~a.bits_); }
    friend constexpr bool operator==(Mask, Mask) noexcept = default;

private:
    explicit constexpr Mask(uint64_t bits) noexcept : bits_(bits) {}
    uint64_t bits_ = 0;
};

// c ? a : b without a branch.
inline constexpr word o_select(Mask c, word a, word b) noexcept {
    return (a & c.bits()) | (b & ~c.bits());
}

// a > b as a mask.  The borrow out of the widened difference b - a fills the
// high limb with ones exactly when b < a.
inline constexpr Mask o_greater(word a, word b) noexcept {
    unsigned __int128 diff = static_cast<unsigned __int128>(b) - a;
    return Mask::from_bits(static_cast<uint64_t>(diff >> 64));
}

inline constexpr Mask o_less(word a, word b) noexcept { return o_greater(b, a); }

// a == b as a mask: x | -x has its top bit set iff x != 0.
inline constexpr Mask o_equal(word a, word b) noexcept {
    word x = a ^ b;
    word nonzero_top = (x | (word{0} - x)) >> 63;
    return Mask::from_bits(nonzero_top - 1);
}

inline constexpr Mask o_greater_equal(word a, word b) noexcept {
    return ~o_greater(b, a);
}

// dst = c ? src : dst.
inline constexpr void o_move(Mask c, word& dst, word src) noexcept {
    dst = o_select(c, src, dst);
}

// Swaps x and y iff c, via masked xor.
inline constexpr void o_swap(Mask c, word& x, word& y) noexcept {
    word d = (x ^ y) & c.bits();
    x ^= d;
    y ^= d;
}

inline constexpr word o_min(word a, word b) noexcept {
    return o_select(o_greater(a, b), b, a);
}

inline constexpr word o_max(word a, word b) noexcept {
    return o_select(o_greater(a, b), a, b);
}

// buf[secret_index] by full linear scan; every slot is read regardless of the
// index.  Out-of-range index yields 0 without revealing that it was.
inline word o_array_read(const ElementBuffer<word>& buf, word secret_index) {
    word acc = 0;
    for (size_t j = 0; j < buf.len(); ++j) {
        word v = buf.read(j);
        o_move(o_equal(static_cast<word>(j), secret_index), acc, v);
    }
    return acc;
}

// buf[secret_index] = value by full read-modify-write scan; out-of-range
// index leaves the buffer unchanged but touches every slot anyway.
inline void o_array_write(ElementBuffer<word>& buf, word secret_index,
                          word value) {
    for (size_t j = 0; j < buf.len(); ++j) {
        word v = buf.read(j);
        o_move(o_equal(static_cast<word>(j), secret_index), v, value);
        buf.write(j, v);
    }
}

}  // namespace obl
