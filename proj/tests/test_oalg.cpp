#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <string_view>
#include <vector>

#include "doctest.h"
#include "obl/oalg.hpp"
#include "obl/rng.hpp"
#include "support/oracles.hpp"

using namespace obl;

namespace {

std::vector<uint8_t> bytes_of(std::string_view s) {
    return {s.begin(), s.end()};
}

word edit_distance_of(std::string_view a, std::string_view b) {
    const auto ba = bytes_of(a), bb = bytes_of(b);
    ElementBuffer<uint8_t> ea(nullptr, std::span<const uint8_t>(ba));
    ElementBuffer<uint8_t> eb(nullptr, std::span<const uint8_t>(bb));
    return o_edit_distance(ea, eb);
}

}  // namespace

TEST_CASE("bitonic sort small case") {
    const word init[] = {3, 1, 2};
    ElementBuffer<word> buf(nullptr, std::span<const word>(init));
    bitonic_sort(buf);
    CHECK(std::vector<word>(buf.raw().begin(), buf.raw().end()) ==
          std::vector<word>{1, 2, 3});
}

TEST_CASE("bitonic comparator counts") {
    CHECK(bitonic_comparator_count(4) == 6);
    CHECK(bitonic_comparator_count(256) == 4608);
    for (uint64_t n = 4; n <= 1024; n <<= 1) {
        const uint64_t k = std::countr_zero(n);
        ElementBuffer<word> buf(nullptr, n);
        Xorshift64Star rng(n);
        for (auto& v : buf.raw()) v = rng.next();
        CHECK(bitonic_sort(buf) == n * k * (k + 1) / 4);
        CHECK(bitonic_comparator_count(n) == n * k * (k + 1) / 4);
    }
}

TEST_CASE("bitonic sort equals reference sort") {
    Xorshift64Star rng(0xB170);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t n = 1 + rng.next_below(300);
        std::vector<word> init(n);
        for (auto& v : init) v = rng.next();
        const bool ascending = (trial & 1) == 0;

        ElementBuffer<word> buf(nullptr, std::span<const word>(init));
        bitonic_sort(buf, ascending);
        const std::vector<word> got(buf.raw().begin(), buf.raw().end());
        CHECK(got == oracles::sorted_words(init, ascending));
    }
}

TEST_CASE("record sort keeps key/payload binding") {
    Xorshift64Star rng(0xB171);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 1 + rng.next_below(128);
        std::vector<SortRecord> init(n);
        for (auto& r : init) {
            r.key = rng.next();          // distinct with overwhelming odds
            r.payload = ~r.key * 3 + 1;  // derived, so binding is checkable
        }
        ElementBuffer<SortRecord> buf(nullptr,
                                      std::span<const SortRecord>(init));
        bitonic_sort(buf);
        word prev = 0;
        for (const SortRecord& r : buf.raw()) {
            CHECK(r.key >= prev);
            CHECK(r.payload == ~r.key * 3 + 1);
            prev = r.key;
        }
    }
}

TEST_CASE("max keys survive sorting next to the pad sentinel") {
    std::vector<word> init = {kSortPadKey, 5, kSortPadKey, 1, 9};
    ElementBuffer<word> buf(nullptr, std::span<const word>(init));
    bitonic_sort(buf);
    CHECK(std::vector<word>(buf.raw().begin(), buf.raw().end()) ==
          oracles::sorted_words(init));
}

TEST_CASE("sort trace depends only on length") {
    auto run = [](uint64_t data_seed, size_t n, bool ascending) {
        RecordingGuard on(true);
        AccessTrace t;
        ElementBuffer<word> buf(&t, n);
        Xorshift64Star rng(data_seed);
        {
            RecordingGuard off(false);
            for (auto& v : buf.raw()) v = rng.next();
        }
        bitonic_sort(buf, ascending);
        return t;
    };
    for (size_t n : {16, 64, 256, 100}) {
        for (bool asc : {true, false}) {
            const AccessTrace base = run(1, n, asc);
            for (uint64_t s = 2; s <= 6; ++s) {
                CHECK(trace_equal(base, run(s, n, asc)));
            }
        }
    }
}

TEST_CASE("edit distance examples") {
    CHECK(edit_distance_of("", "abc") == 3);
    CHECK(edit_distance_of("a", "a") == 0);
    CHECK(edit_distance_of("kitten", "sitting") == 3);
    CHECK(edit_distance_of("abc", "") == 3);
    CHECK(edit_distance_of("", "") == 0);
    CHECK(edit_distance_of("flaw", "lawn") == 2);
}

TEST_CASE("edit distance equals branching DP oracle") {
    Xorshift64Star rng(0xED17);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t la = rng.next_below(101);
        const size_t lb = rng.next_below(101);
        std::vector<uint8_t> a(la), b(lb);
        // Small alphabet keeps matches frequent; full-byte values sometimes.
        const int alpha = trial % 3 == 0 ? 256 : 4;
        for (auto& c : a) c = static_cast<uint8_t>(rng.next_below(alpha));
        for (auto& c : b) c = static_cast<uint8_t>(rng.next_below(alpha));

        ElementBuffer<uint8_t> ea(nullptr, std::span<const uint8_t>(a));
        ElementBuffer<uint8_t> eb(nullptr, std::span<const uint8_t>(b));
        const word want = oracles::edit_distance(a, b);
        CHECK(o_edit_distance(ea, eb) == want);
        CHECK(o_edit_distance_full(ea, eb) == want);
        CHECK(o_edit_distance(eb, ea) == want);  // symmetry
        CHECK(unprotected_edit_distance(a, b) == want);
    }
}

TEST_CASE("edit distance trace depends only on the two lengths") {
    auto run = [](uint64_t data_seed, size_t la, size_t lb) {
        RecordingGuard on(true);
        AccessTrace t;
        ElementBuffer<uint8_t> a(&t, la);
        ElementBuffer<uint8_t> b(&t, lb);
        Xorshift64Star rng(data_seed);
        {
            RecordingGuard off(false);
            for (auto& c : a.raw()) c = static_cast<uint8_t>(rng.next());
            for (auto& c : b.raw()) c = static_cast<uint8_t>(rng.next());
        }
        o_edit_distance(a, b);
        return t;
    };
    for (auto [la, lb] : {std::pair<size_t, size_t>{10, 10}, {20, 20}, {10, 20}}) {
        const AccessTrace base = run(1, la, lb);
        for (uint64_t s = 2; s <= 6; ++s) {
            CHECK(trace_equal(base, run(s, la, lb)));
        }
    }
}

TEST_CASE("saturating distance addition") {
    CHECK(sat_add_distance(3, 4) == 7);
    CHECK(sat_add_distance(kInfDistance, 0) == kInfDistance);
    CHECK(sat_add_distance(kInfDistance, kInfDistance) == kInfDistance);
    CHECK(sat_add_distance(kInfDistance - 1, 1) == kInfDistance);
    CHECK(sat_add_distance(kInfDistance, 12345) == kInfDistance);
}

TEST_CASE("dist matrix construction") {
    DistMatrix m(nullptr, 3);
    for (size_t i = 0; i < 3; ++i) {
        for (size_t j = 0; j < 3; ++j) {
            CHECK(m.at(i, j) == (i == j ? 0 : kInfDistance));
        }
    }
    std::vector<word> bad(5);
    CHECK_THROWS_AS(DistMatrix(nullptr, 2, bad), std::invalid_argument);
}

TEST_CASE("floyd-warshall two-node and disconnected cases") {
    DistMatrix m(nullptr, 2);
    m.set(0, 1, 7);
    o_floyd_warshall(m);
    CHECK(m.at(0, 1) == 7);
    CHECK(m.at(1, 0) == kInfDistance);  // directed, no reverse edge
    CHECK(m.at(0, 0) == 0);

    DistMatrix d(nullptr, 3);
    d.set(0, 1, 2);
    o_floyd_warshall(d);
    CHECK(d.at(0, 2) == kInfDistance);
    CHECK(d.at(2, 0) == kInfDistance);
}

TEST_CASE("floyd-warshall equals dijkstra oracle") {
    Xorshift64Star rng(0xF10D);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = 2 + rng.next_below(63);
        std::vector<word> adj(n * n, kInfDistance);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) {
                if (i == j) {
                    adj[i * n + j] = 0;
                } else if (rng.next_below(100) < 25) {
                    adj[i * n + j] = 1 + rng.next_below(100);
                }
            }
        }
        const std::vector<word> want = oracles::apsp_dijkstra(adj, n);

        DistMatrix m(nullptr, n, adj);
        o_floyd_warshall(m);
        for (size_t i = 0; i < n * n; ++i) {
            CHECK(m.entries.raw()[i] == want[i]);
        }

        std::vector<word> twin = adj;
        unprotected_floyd_warshall(twin, n);
        CHECK(twin == want);
    }
}

TEST_CASE("floyd-warshall result satisfies the triangle inequality") {
    Xorshift64Star rng(0xF10E);
    const size_t n = 12;
    std::vector<word> adj(n * n, kInfDistance);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) adj[i * n + j] = 0;
            else if (rng.next_below(100) < 30) adj[i * n + j] = 1 + rng.next_below(50);
        }
    }
    DistMatrix m(nullptr, n, adj);
    o_floyd_warshall(m);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            for (size_t k = 0; k < n; ++k) {
                CHECK(m.at(i, j) <=
                      sat_add_distance(m.at(i, k), m.at(k, j)));
            }
        }
    }
}

TEST_CASE("floyd-warshall trace depends only on n") {
    auto run = [](uint64_t data_seed, size_t n) {
        RecordingGuard on(true);
        AccessTrace t;
        Xorshift64Star rng(data_seed);
        std::vector<word> adj(n * n, kInfDistance);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) {
                if (i == j) adj[i * n + j] = 0;
                else if (rng.next() & 1) adj[i * n + j] = 1 + rng.next_below(9);
            }
        }
        DistMatrix m(&t, n, adj);
        o_floyd_warshall(m);
        return t;
    };
    for (size_t n : {8, 16}) {
        const AccessTrace base = run(1, n);
        for (uint64_t s = 2; s <= 6; ++s) {
            CHECK(trace_equal(base, run(s, n)));
        }
    }
}

TEST_CASE("unprotected sort twins agree with the oracle") {
    Xorshift64Star rng(0x5047);
    std::vector<word> v(257);
    for (auto& x : v) x = rng.next_below(64);
    auto want = oracles::sorted_words(v);
    unprotected_sort(v);
    CHECK(v == want);

    std::vector<SortRecord> r(100);
    for (auto& x : r) x = {rng.next_below(8), rng.next()};
    unprotected_sort(r);
    for (size_t i = 1; i < r.size(); ++i) {
        const bool ordered =
            r[i - 1].key < r[i].key ||
            (r[i - 1].key == r[i].key && r[i - 1].payload <= r[i].payload);
        CHECK(ordered);
    }
}
