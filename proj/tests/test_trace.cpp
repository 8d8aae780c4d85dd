#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "obl/rng.hpp"
#include "obl/trace.hpp"

using namespace obl;

TEST_CASE("element buffer read after write") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 8);
    buf.write(3, 42);
    CHECK(buf.read(3) == 42);
}

TEST_CASE("write emits exactly one event") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 4);
    buf.write(2, 7);
    REQUIRE(t.size() == 1);
    CHECK(t[0] == AccessEvent{AccessKind::Write, buf.region(), 2, 8});
}

TEST_CASE("interleaved writes preserve order") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> a(&t, 4);
    ElementBuffer<uint64_t> b(&t, 4);
    a.write(0, 1);
    b.write(1, 2);
    a.write(2, 3);
    REQUIRE(t.size() == 3);
    CHECK(t[0].region == a.region());
    CHECK(t[1].region == b.region());
    CHECK(t[2].region == a.region());
    CHECK(t[0].offset == 0);
    CHECK(t[1].offset == 1);
    CHECK(t[2].offset == 2);
}

TEST_CASE("out of range access throws") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 4);
    CHECK_THROWS_AS(buf.read(4), std::out_of_range);
    CHECK_THROWS_AS(buf.write(5, 1), std::out_of_range);
    RawBuffer raw(&t, 4, 16);
    uint8_t tmp[16] = {};
    CHECK_THROWS_AS(raw.read(4, tmp), std::out_of_range);
}

TEST_CASE("region ids are sequential per trace") {
    AccessTrace t;
    ElementBuffer<uint64_t> a(&t, 1);
    ElementBuffer<uint32_t> b(&t, 1);
    RawBuffer c(&t, 1, 24);
    CHECK(a.region() == 0);
    CHECK(b.region() == 1);
    CHECK(c.region() == 2);

    AccessTrace t2;
    ElementBuffer<uint64_t> d(&t2, 1);
    CHECK(d.region() == 0);
}

TEST_CASE("trace_equal reflexivity and empty") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 4);
    buf.write(0, 1);
    buf.read(1);
    CHECK(trace_equal(t, t));
    AccessTrace e1, e2;
    CHECK(trace_equal(e1, e2));
}

TEST_CASE("trace_equal detects single-offset difference") {
    RecordingGuard on(true);
    AccessTrace ta, tb;
    ElementBuffer<uint64_t> a(&ta, 4);
    ElementBuffer<uint64_t> b(&tb, 4);
    a.read(0);
    a.read(1);
    b.read(0);
    b.read(2);
    CHECK(!trace_equal(ta, tb));
    REQUIRE(first_divergence(ta, tb).has_value());
    CHECK(*first_divergence(ta, tb) == 1);
}

TEST_CASE("first_divergence on length mismatch") {
    RecordingGuard on(true);
    AccessTrace ta, tb;
    ElementBuffer<uint64_t> a(&ta, 4);
    ElementBuffer<uint64_t> b(&tb, 4);
    a.read(0);
    a.read(1);
    b.read(0);
    REQUIRE(first_divergence(ta, tb).has_value());
    CHECK(*first_divergence(ta, tb) == 1);
    CHECK(!first_divergence(ta, ta).has_value());
}

TEST_CASE("page_project merges a sequential scan into one page") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 512);
    for (size_t i = 0; i < 512; ++i) buf.read(i);
    const AccessTrace p = page_project(t, 4096);
    REQUIRE(p.size() == 1);
    CHECK(p[0].kind == AccessKind::Read);
    CHECK(p[0].offset == 0);
}

TEST_CASE("page_project offset arithmetic") {
    AccessTrace t;
    t.append({AccessKind::Read, 0, 512, 8});
    const AccessTrace p = page_project(t, 4096);
    REQUIRE(p.size() == 1);
    CHECK(p[0].offset == 1);
}

TEST_CASE("page_project keeps alternating read/write on one page") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 16);
    for (size_t i = 0; i < 4; ++i) {
        buf.read(i);
        buf.write(i, i);
    }
    const AccessTrace p = page_project(t, 4096);
    CHECK(p.size() == 8);  // kinds alternate, so nothing collapses
}

TEST_CASE("page_project at element width is identity up to collapsing") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 32);
    Xorshift64Star rng(5);
    for (int i = 0; i < 100; ++i) buf.read(rng.next_below(32));
    const AccessTrace p = page_project(t, 8);
    // Offsets survive unchanged; only consecutive repeats collapse.
    size_t j = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i > 0 && t[i] == t[i - 1]) continue;
        REQUIRE(j < p.size());
        CHECK(p[j] == t[i]);
        ++j;
    }
    CHECK(j == p.size());
}

TEST_CASE("dump format is one event per line") {
    AccessTrace t;
    t.append({AccessKind::Read, 2, 5, 8});
    t.append({AccessKind::Write, 0, 17, 1024});
    std::ostringstream os;
    dump_trace(t, os);
    CHECK(os.str() == "R 2 5 8\nW 0 17 1024\n");
}

TEST_CASE("dump_trace_file round trip") {
    AccessTrace t;
    t.append({AccessKind::Write, 1, 3, 16});
    const std::string path = "trace_dump_test.txt";
    dump_trace_file(t, path);
    std::ifstream is(path);
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "W 1 3 16");
    CHECK(!std::getline(is, line));
    std::remove(path.c_str());
}

TEST_CASE("recording switches: global, per-buffer, null sink") {
    AccessTrace t;
    ElementBuffer<uint64_t> buf(&t, 4);
    {
        RecordingGuard off(false);
        buf.write(0, 1);
    }
    CHECK(t.empty());

    RecordingGuard on(true);
    buf.set_recording(false);
    buf.write(1, 2);
    CHECK(t.empty());
    buf.set_recording(true);
    buf.write(2, 3);
    CHECK(t.size() == 1);

    ElementBuffer<uint64_t> untracked(nullptr, 4);
    untracked.write(0, 9);
    CHECK(untracked.read(0) == 9);
    CHECK(t.size() == 1);
}

TEST_CASE("outputs identical with recording on and off") {
    Xorshift64Star rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<uint64_t> init(32);
        for (auto& v : init) v = rng.next();
        const uint64_t seed = rng.next();

        auto run = [&](bool record) {
            RecordingGuard g(record);
            AccessTrace t;
            ElementBuffer<uint64_t> buf(&t, std::span<const uint64_t>(init));
            Xorshift64Star r(seed);
            uint64_t acc = 0;
            for (int i = 0; i < 50; ++i) {
                const size_t j = r.next_below(32);
                acc ^= buf.read(j);
                buf.write(j, acc);
            }
            return std::pair{acc, std::vector<uint64_t>(buf.raw().begin(),
                                                        buf.raw().end())};
        };
        CHECK(run(true) == run(false));
    }
}

TEST_CASE("identical operation sequences yield identical traces") {
    auto run = [] {
        RecordingGuard on(true);
        AccessTrace t;
        ElementBuffer<uint64_t> buf(&t, 16);
        Xorshift64Star rng(3);
        for (int i = 0; i < 64; ++i) {
            const size_t j = rng.next_below(16);
            buf.write(j, buf.read(j) + 1);
        }
        return t;
    };
    CHECK(trace_equal(run(), run()));
}

TEST_CASE("event cap is enforced") {
    RecordingGuard on(true);
    AccessTrace t(3);
    ElementBuffer<uint64_t> buf(&t, 4);
    buf.read(0);
    buf.read(1);
    buf.read(2);
    CHECK_THROWS_AS(buf.read(3), std::length_error);
}

TEST_CASE("raw buffer round trip with runtime width") {
    RecordingGuard on(true);
    AccessTrace t;
    RawBuffer buf(&t, 4, 24);
    uint8_t in[24], out[24] = {};
    for (int i = 0; i < 24; ++i) in[i] = static_cast<uint8_t>(i * 7);
    buf.write(2, in);
    buf.read(2, out);
    CHECK(std::memcmp(in, out, 24) == 0);
    REQUIRE(t.size() == 2);
    CHECK(t[0] == AccessEvent{AccessKind::Write, buf.region(), 2, 24});
    CHECK(t[1] == AccessEvent{AccessKind::Read, buf.region(), 2, 24});
    CHECK_THROWS_AS(RawBuffer(&t, 4, 0), std::invalid_argument);
}

TEST_CASE("clear_events keeps region numbering") {
    RecordingGuard on(true);
    AccessTrace t;
    ElementBuffer<uint64_t> a(&t, 2);
    a.read(0);
    t.clear_events();
    CHECK(t.empty());
    ElementBuffer<uint64_t> b(&t, 2);
    CHECK(b.region() == 1);
}
