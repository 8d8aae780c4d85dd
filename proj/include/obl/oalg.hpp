#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "obl/oprim.hpp"
#include "obl/trace.hpp"

namespace obl {

// Key/payload pair moved as two 64-bit lanes by the sorting network.
struct SortRecord {
    word key = 0;
    word payload = 0;

    friend bool operator==(const SortRecord&, const SortRecord&) = default;
};

// Padding key for non-power-of-two inputs; compares greater-or-equal to every
// real key, so pads sink to the tail of an ascending run.
inline constexpr word kSortPadKey = ~word{0};

inline Mask sort_greater(word a, word b) noexcept { return o_greater(a, b); }
inline Mask sort_greater(const SortRecord& a, const SortRecord& b) noexcept {
    return o_greater(a.key, b.key);
}
inline void sort_swap(Mask c, word& a, word& b) noexcept { o_swap(c, a, b); }
inline void sort_swap(Mask c, SortRecord& a, SortRecord& b) noexcept {
    o_swap(c, a.key, b.key);
    o_swap(c, a.payload, b.payload);
}

// Comparators in Batcher's bitonic network for n = 2^k elements.
inline constexpr uint64_t bitonic_comparator_count(uint64_t n) noexcept {
    if (n < 2) return 0;
    const uint64_t k = std::countr_zero(std::bit_ceil(n));
    return n * k * (k + 1) / 4;
}

namespace detail {

// Iterative bitonic network over a power-of-two buffer.  Comparator order is
// a function of len alone; each comparator reads both slots, conditionally
// swaps in registers and writes both slots back.
template <typename T>
size_t bitonic_network(ElementBuffer<T>& buf, bool ascending) {
    const size_t n = buf.len();
    size_t comparators = 0;
    for (size_t k = 2; k <= n; k <<= 1) {
        for (size_t j = k >> 1; j > 0; j >>= 1) {
            for (size_t i = 0; i < n; ++i) {
                const size_t l = i ^ j;
                if (l <= i) continue;
                const bool up = ((i & k) == 0) == ascending;
                T a = buf.read(i);
                T b = buf.read(l);
                sort_swap(up ? sort_greater(a, b) : sort_greater(b, a), a, b);
                buf.write(i, a);
                buf.write(l, b);
                ++comparators;
            }
        }
    }
    return comparators;
}

template <typename T>
T pad_element();

template <>
inline word pad_element<word>() { return kSortPadKey; }
template <>
inline SortRecord pad_element<SortRecord>() { return {kSortPadKey, 0}; }

// Pads to the next power of two with max-key sentinels, runs the network and
// strips the pads by their public positions (tail when ascending, head when
// descending).
template <typename T>
size_t bitonic_sort_any(ElementBuffer<T>& buf, bool ascending) {
    const size_t n = buf.len();
    if (n <= 1) return 0;
    const size_t p = std::bit_ceil(n);
    if (p == n) return bitonic_network(buf, ascending);

    ElementBuffer<T> padded(buf.sink(), p);
    for (size_t i = 0; i < n; ++i) padded.write(i, buf.read(i));
    for (size_t i = n; i < p; ++i) padded.write(i, pad_element<T>());
    const size_t comparators = bitonic_network(padded, ascending);
    const size_t base = ascending ? 0 : p - n;
    for (size_t i = 0; i < n; ++i) buf.write(i, padded.read(base + i));
    return comparators;
}

}  // namespace detail

// Oblivious sort; returns the comparator count actually executed.
size_t bitonic_sort(ElementBuffer<word>& buf, bool ascending = true);
size_t bitonic_sort(ElementBuffer<SortRecord>& buf, bool ascending = true);

// Levenshtein distance over two instrumented byte strings, rolling rows.
// Lengths are public; contents are not.
word o_edit_distance(const ElementBuffer<uint8_t>& a,
                     const ElementBuffer<uint8_t>& b);

// Full-matrix variant kept as a cross-check for the rolling one.
word o_edit_distance_full(const ElementBuffer<uint8_t>& a,
                          const ElementBuffer<uint8_t>& b);

// Unreachable distance; additions saturate here so mins stay well defined.
inline constexpr word kInfDistance = word{1} << 62;

inline constexpr word sat_add_distance(word a, word b) noexcept {
    const word s = a + b;
    return o_select(o_greater(s, kInfDistance), kInfDistance, s);
}

// Dense n x n distance matrix, row major, kInfDistance for missing edges.
struct DistMatrix {
    size_t n;
    ElementBuffer<word> entries;

    DistMatrix(AccessTrace* sink, size_t n_)
        : n(n_), entries(sink, n_ * n_) {
        for (size_t i = 0; i < n * n; ++i) {
            entries.write(i, i / n == i % n ? 0 : kInfDistance);
        }
    }

    DistMatrix(AccessTrace* sink, size_t n_, std::span<const word> init)
        : n(n_), entries(sink, n_ * n_) {
        if (init.size() != n * n)
            throw std::invalid_argument("DistMatrix: bad init size");
        for (size_t i = 0; i < n * n; ++i) entries.write(i, init[i]);
    }

    word at(size_t i, size_t j) const { return entries.read(i * n + j); }
    void set(size_t i, size_t j, word v) { entries.write(i * n + j, v); }
};

// All-pairs shortest paths with an unconditional write per inner step.
void o_floyd_warshall(DistMatrix& m);

// Branching twins used as the Unprotected side of benchmarks.
void unprotected_sort(std::vector<word>& v, bool ascending = true);
void unprotected_sort(std::vector<SortRecord>& v, bool ascending = true);
uint64_t unprotected_edit_distance(std::span<const uint8_t> a,
                                   std::span<const uint8_t> b);
void unprotected_floyd_warshall(std::vector<word>& dist, size_t n);

}  // namespace obl
