#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "obl/apps.hpp"
#include "obl/blocks.hpp"
#include "obl/rng.hpp"
#include "support/oracles.hpp"

using namespace obl;

namespace {

KVRecord kv_u64(uint64_t key, uint32_t value) {
    KVRecord r;
    for (int i = 0; i < 8; ++i) {
        r.key[7 - i] = static_cast<uint8_t>(key >> (8 * i));
    }
    r.value = value;
    return r;
}

Block block_of(std::span<const KVRecord> recs) {
    Block b;
    for (const auto& r : recs) b.append(r);
    return b;
}

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("make_kv truncates and zero-pads") {
    const KVRecord r = make_kv("cat", 7);
    CHECK(r.key[0] == 'c');
    CHECK(r.key[2] == 't');
    CHECK(r.key[3] == 0);
    CHECK(r.key[11] == 0);
    CHECK(r.value == 7);
    CHECK(kv_key_string(r) == "cat");

    const KVRecord big = make_kv("averylongwordindeed", 1);
    CHECK(kv_key_string(big) == "averylongwor");
}

TEST_CASE("key order is big-endian across the 12 bytes") {
    CHECK(kv_greater(make_kv("b", 0), make_kv("a", 0)).as_bool());
    CHECK(kv_greater(make_kv("ab", 0), make_kv("aa", 0)).as_bool());
    CHECK(!kv_greater(make_kv("a", 0), make_kv("a", 9)).as_bool());
    CHECK(kv_greater(make_kv("aaaaaaaaz", 0),
                     make_kv("aaaaaaaay", 0)).as_bool());  // beyond byte 8
    CHECK(kv_greater(sentinel_record(), make_kv("zzzzzzzzzzzz", 0)).as_bool());

    Xorshift64Star rng(44);
    for (int i = 0; i < 2000; ++i) {
        KVRecord a, b;
        for (auto& c : a.key) c = static_cast<uint8_t>(rng.next());
        b = a;
        if (rng.next() & 1) {
            b.key[rng.next_below(12)] = static_cast<uint8_t>(rng.next());
        }
        const bool lex = std::lexicographical_compare(b.key.begin(), b.key.end(),
                                                      a.key.begin(), a.key.end());
        CHECK(kv_greater(a, b).as_bool() == lex);
    }
}

TEST_CASE("kv_prefix_equal honors the public prefix length") {
    const KVRecord a = make_kv("wordplay", 1);
    const KVRecord b = make_kv("wordsmith", 2);
    CHECK(kv_prefix_equal(a, b, 4).as_bool());
    CHECK(!kv_prefix_equal(a, b, 5).as_bool());
    CHECK(kv_prefix_equal(a, a, 12).as_bool());
    CHECK(kv_prefix_equal(a, b, 0).as_bool());

    // Prefix beyond byte 8 exercises the low lane.
    const KVRecord c = make_kv("aaaaaaaaab", 0);
    const KVRecord d = make_kv("aaaaaaaaac", 0);
    CHECK(kv_prefix_equal(c, d, 9).as_bool());
    CHECK(!kv_prefix_equal(c, d, 10).as_bool());
}

TEST_CASE("kv_swap and kv_select act on whole records") {
    KVRecord a = make_kv("one", 1), b = make_kv("two", 2);
    kv_swap(Mask::from_bool(false), a, b);
    CHECK(kv_key_string(a) == "one");
    kv_swap(Mask::from_bool(true), a, b);
    CHECK(kv_key_string(a) == "two");
    CHECK(a.value == 2);
    CHECK(kv_key_string(b) == "one");

    CHECK(kv_select(Mask::from_bool(true), a, b) == a);
    CHECK(kv_select(Mask::from_bool(false), a, b) == b);
}

TEST_CASE("sentinel detection") {
    CHECK(kv_is_sentinel(sentinel_record()).as_bool());
    KVRecord nearly = sentinel_record();
    nearly.key[11] = 0xFE;
    CHECK(!kv_is_sentinel(nearly).as_bool());
    KVRecord valued = sentinel_record();
    valued.value = 99;  // value does not affect sentinel-ness
    CHECK(kv_is_sentinel(valued).as_bool());
    CHECK(!kv_is_sentinel(make_kv("a", 0)).as_bool());
}

TEST_CASE("block append, full, clear") {
    Block b;
    CHECK(b.record_count == 0);
    for (size_t i = 0; i < kRecordsPerBlock; ++i) {
        CHECK(!b.full());
        b.append(kv_u64(i, 1));
    }
    CHECK(b.full());
    CHECK_THROWS_AS(b.append(kv_u64(99, 1)), std::length_error);
    b.clear();
    CHECK(b.record_count == 0);
    CHECK(kv_is_sentinel(b.records[0]).as_bool());
    CHECK(kv_is_sentinel(b.records[62]).as_bool());
}

TEST_CASE("block store round trip and resize") {
    const std::string path = tmp_path("store_rt.bin");
    BlockStore store = BlockStore::create(path, 4, nullptr);
    CHECK(store.block_count() == 4);
    CHECK(std::filesystem::file_size(path) == 4 * kBlockBytes);

    Xorshift64Star rng(3);
    std::vector<Block> blocks(4);
    for (size_t i = 0; i < 4; ++i) {
        for (int r = 0; r < 10; ++r) {
            blocks[i].append(kv_u64(rng.next(), static_cast<uint32_t>(i)));
        }
        store.write_block(i, blocks[i]);
    }
    for (size_t i = 0; i < 4; ++i) CHECK(store.read_block(i) == blocks[i]);

    store.resize(6);
    CHECK(store.block_count() == 6);
    CHECK(std::filesystem::file_size(path) == 6 * kBlockBytes);
    CHECK(store.read_block(5).record_count == 0);
    CHECK(store.read_block(2) == blocks[2]);

    store.resize(2);
    CHECK(store.block_count() == 2);
    CHECK(std::filesystem::file_size(path) == 2 * kBlockBytes);
    CHECK(store.read_block(1) == blocks[1]);
    CHECK_THROWS_AS(store.read_block(2), std::out_of_range);

    BlockStore reopened = BlockStore::open_existing(path, nullptr);
    CHECK(reopened.block_count() == 2);
    CHECK(reopened.read_block(0) == blocks[0]);
    std::filesystem::remove(path);

    CHECK_THROWS(BlockStore::open_existing(tmp_path("missing_store.bin"),
                                           nullptr));
}

TEST_CASE("block store records one event per block access") {
    RecordingGuard on(true);
    AccessTrace t;
    const std::string path = tmp_path("store_ev.bin");
    BlockStore store = BlockStore::create(path, 3, &t);
    t.clear_events();
    Block b;
    store.write_block(1, b);
    store.read_block(2);
    REQUIRE(t.size() == 2);
    CHECK(t[0] == AccessEvent{AccessKind::Write, store.region(), 1, 1024});
    CHECK(t[1] == AccessEvent{AccessKind::Read, store.region(), 2, 1024});
    std::filesystem::remove(path);
}

TEST_CASE("linear block access returns the matching block") {
    const std::string path = tmp_path("store_lin.bin");
    BlockStore store = BlockStore::create(path, 4, nullptr);
    std::vector<Block> blocks(4);
    for (size_t i = 0; i < 4; ++i) {
        blocks[i].append(kv_u64(i * 100, static_cast<uint32_t>(i)));
        store.write_block(i, blocks[i]);
    }
    for (size_t i = 0; i < 4; ++i) {
        CHECK(o_block_access_linear(store, i) == blocks[i]);
    }

    // Missing id: all-zero image, same scan.
    const Block zero = o_block_access_linear(store, 17);
    const Block zero_image = [] {
        Block b;
        std::array<uint8_t, kBlockBytes> raw{};
        std::memcpy(&b, raw.data(), sizeof(b));
        return b;
    }();
    CHECK(zero == zero_image);
    std::filesystem::remove(path);
}

TEST_CASE("linear block access touches every block for any id") {
    RecordingGuard on(true);
    AccessTrace t;
    const std::string path = tmp_path("store_lin_tr.bin");
    BlockStore store = BlockStore::create(path, 5, &t);

    auto trace_for = [&](uint64_t id) {
        t.clear_events();
        o_block_access_linear(store, id);
        return t.events();
    };
    const auto base = trace_for(0);
    REQUIRE(base.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(base[i] == AccessEvent{AccessKind::Read, store.region(), i, 1024});
    }
    CHECK(trace_for(4) == base);
    CHECK(trace_for(99) == base);
    std::filesystem::remove(path);
}

TEST_CASE("block oram agrees with direct file reads") {
    const std::string path = tmp_path("store_oram.bin");
    const uint64_t n = 64;
    BlockStore store = BlockStore::create(path, n, nullptr);
    Xorshift64Star rng(8);
    for (uint64_t i = 0; i < n; ++i) {
        Block b;
        for (int r = 0; r < 5; ++r) b.append(kv_u64(rng.next(), 1));
        store.write_block(i, b);
    }
    BlockOram oram = BlockOram::from_store(store, 99, nullptr);
    for (int a = 0; a < 10000; ++a) {
        const uint64_t id = rng.next_below(n);
        CHECK(oram.read_block(id) == store.read_block(id));
    }

    // Writes go to the ORAM only; the store is a snapshot source.
    Block nb;
    nb.append(kv_u64(1, 2));
    oram.write_block(3, nb);
    CHECK(oram.read_block(3) == nb);
    std::filesystem::remove(path);
}

TEST_CASE("sort_block_records orders slots, sentinels last") {
    Xorshift64Star rng(15);
    for (int trial = 0; trial < 50; ++trial) {
        Block b;
        const size_t cnt = rng.next_below(kRecordsPerBlock + 1);
        for (size_t i = 0; i < cnt; ++i) {
            b.append(kv_u64(rng.next_below(1000), static_cast<uint32_t>(i)));
        }
        Block sorted = b;
        sort_block_records(sorted);
        CHECK(sorted.record_count == b.record_count);

        std::vector<KVRecord> want(b.records, b.records + kRecordsPerBlock);
        std::stable_sort(want.begin(), want.end(),
                         [](const KVRecord& x, const KVRecord& y) {
                             return oracles::KeyLess{}(x.key, y.key);
                         });
        for (size_t i = 0; i < kRecordsPerBlock; ++i) {
            CHECK(sorted.records[i].key == want[i].key);
        }
        // Multiset of whole records is preserved.
        std::vector<KVRecord> got(sorted.records,
                                  sorted.records + kRecordsPerBlock);
        std::sort(got.begin(), got.end(), oracles::kv_less);
        std::sort(want.begin(), want.end(), oracles::kv_less);
        CHECK(got == want);
    }
}

TEST_CASE("merge_split leaves an already split pair unchanged") {
    std::vector<KVRecord> lo, hi;
    for (uint64_t i = 1; i <= 63; ++i) lo.push_back(kv_u64(i, 0));
    for (uint64_t i = 64; i <= 126; ++i) hi.push_back(kv_u64(i, 0));
    Block a = block_of(lo), b = block_of(hi);
    const Block a0 = a, b0 = b;
    merge_split(a, b);
    CHECK(a == a0);
    CHECK(b == b0);
}

TEST_CASE("merge_split equals the sort-then-split oracle") {
    Xorshift64Star rng(16);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t ca = rng.next_below(kRecordsPerBlock + 1);
        const size_t cb = rng.next_below(kRecordsPerBlock + 1);
        Block a, b;
        for (size_t i = 0; i < ca; ++i) {
            a.append(kv_u64(rng.next(), static_cast<uint32_t>(i)));
        }
        for (size_t i = 0; i < cb; ++i) {
            b.append(kv_u64(rng.next(), static_cast<uint32_t>(100 + i)));
        }
        sort_block_records(a);
        sort_block_records(b);

        std::vector<KVRecord> all(a.records, a.records + kRecordsPerBlock);
        all.insert(all.end(), b.records, b.records + kRecordsPerBlock);
        std::sort(all.begin(), all.end(), oracles::kv_less);

        const bool low_to_a = (trial & 1) == 0;
        merge_split(a, b, low_to_a);
        const Block& lo = low_to_a ? a : b;
        const Block& hi = low_to_a ? b : a;

        for (size_t i = 0; i < kRecordsPerBlock; ++i) {
            CHECK(lo.records[i].key == all[i].key);
            CHECK(hi.records[i].key == all[kRecordsPerBlock + i].key);
        }
        CHECK(lo.record_count == std::min(ca + cb, kRecordsPerBlock));
        CHECK(hi.record_count ==
              (ca + cb > kRecordsPerBlock ? ca + cb - kRecordsPerBlock : 0));

        // Record multiset survives end to end.
        std::vector<KVRecord> got(lo.records, lo.records + kRecordsPerBlock);
        got.insert(got.end(), hi.records, hi.records + kRecordsPerBlock);
        std::sort(got.begin(), got.end(), oracles::kv_less);
        CHECK(got == all);
    }
}

TEST_CASE("block sort matches the flatten-sort-repack oracle") {
    Xorshift64Star rng(17);
    for (uint64_t blocks : {1, 2, 3, 7, 16, 40}) {
        const std::string pa = tmp_path("bsort_a.bin");
        const std::string pb = tmp_path("bsort_b.bin");
        gen_kv_store(pa, blocks, rng.next());
        std::filesystem::copy_file(pa, pb,
                                   std::filesystem::copy_options::overwrite_existing);
        BlockStore sa = BlockStore::open_existing(pa, nullptr);
        BlockStore sb = BlockStore::open_existing(pb, nullptr);

        const BlockSortStats st = block_bitonic_sort(sa);
        CHECK(st.merge_splits == merge_split_count(std::bit_ceil(blocks)));
        CHECK(st.block_presorts == blocks);
        unprotected_block_sort(sb);

        CHECK(sa.block_count() == blocks);
        const auto ra = oracles::store_records(sa);
        const auto rb = oracles::store_records(sb);
        REQUIRE(ra.size() == rb.size());
        for (size_t i = 0; i < ra.size(); ++i) {
            CHECK(ra[i].key == rb[i].key);
        }
        for (size_t i = 1; i < ra.size(); ++i) {
            CHECK(!oracles::KeyLess{}(ra[i].key, ra[i - 1].key));
        }
        std::filesystem::remove(pa);
        std::filesystem::remove(pb);
    }
}

TEST_CASE("two blocks need exactly one merge_split") {
    const std::string path = tmp_path("bsort2.bin");
    gen_kv_store(path, 2, 5);
    BlockStore store = BlockStore::open_existing(path, nullptr);
    CHECK(block_bitonic_sort(store).merge_splits == 1);
    CHECK(merge_split_count(2) == 1);
    std::filesystem::remove(path);
}

TEST_CASE("buffer manager basics: working block fills then rolls") {
    PathOram oram(OramConfig{.capacity = 64, .block_bytes = kBlockBytes});
    BufferManager bm(oram);
    CHECK(bm.working_id() == 0);
    CHECK(bm.working_free_slots() == kRecordsPerBlock);

    for (size_t i = 0; i < kRecordsPerBlock; ++i) {
        CHECK(bm.add_record(kv_u64(i, 1)) == 0);
    }
    CHECK(bm.working_free_slots() == 0);
    CHECK(bm.add_record(kv_u64(99, 1)) == 1);  // rolled into a fresh block
    CHECK(bm.working_id() == 1);
    CHECK(bm.cached_ids() == std::vector<uint64_t>{0});

    // The rolled block is retrievable and intact.
    Block& b0 = bm.get_block(0);
    CHECK(b0.record_count == kRecordsPerBlock);
    CHECK(b0.records[5] == kv_u64(5, 1));
    CHECK(bm.miss_log().empty());  // came from the cache, not the ORAM
}

TEST_CASE("buffer manager LRU eviction order") {
    RecordingGuard on(true);
    AccessTrace t;
    PathOram oram(OramConfig{.capacity = 64, .block_bytes = kBlockBytes}, &t);
    BufferManager bm(oram, 2);

    // Create ids 0..3; cache capacity 2.
    for (uint64_t id = 0; id < 4; ++id) {
        for (size_t i = 0; i < kRecordsPerBlock; ++i) {
            bm.add_record(kv_u64(id * 100 + i, 1));
        }
    }
    CHECK(bm.working_id() == 3);
    // Blocks 0,1,2 rolled; capacity 2 kept {1,2}, evicting 0 to the ORAM.
    CHECK(bm.cached_ids() == std::vector<uint64_t>{1, 2});

    t.clear_events();
    bm.get_block(1);  // hit, no ORAM traffic
    CHECK(t.empty());
    CHECK(bm.miss_log().empty());
    CHECK(bm.cached_ids() == std::vector<uint64_t>{2, 1});  // 1 promoted

    bm.get_block(0);  // miss: fetch 0, evict 2
    CHECK(bm.miss_log() == std::vector<uint64_t>{0});
    CHECK(bm.cached_ids() == std::vector<uint64_t>{1, 0});
    CHECK(!t.empty());  // ORAM path traffic happened
    CHECK(bm.get_block(0).records[0] == kv_u64(0, 1));
}

TEST_CASE("buffer manager key index") {
    PathOram oram(OramConfig{.capacity = 8, .block_bytes = kBlockBytes});
    BufferManager bm(oram);
    CHECK(!bm.lookup(42).has_value());
    bm.bind(42, 3);
    REQUIRE(bm.lookup(42).has_value());
    CHECK(*bm.lookup(42) == 3);
    bm.bind(42, 4);
    CHECK(*bm.lookup(42) == 4);
    CHECK(bm.index().size() == 1);
}

TEST_CASE("buffer manager config errors") {
    PathOram oram(OramConfig{.capacity = 8, .block_bytes = kBlockBytes});
    CHECK_THROWS_AS(BufferManager(oram, 0), std::invalid_argument);

    PathOram tiny(OramConfig{.capacity = 2, .block_bytes = kBlockBytes});
    BufferManager bm(tiny, 2);
    for (size_t i = 0; i < kRecordsPerBlock; ++i) bm.add_record(kv_u64(i, 1));
    bm.add_record(kv_u64(100, 1));  // id 1, the last one available
    auto fill = [&] {
        for (size_t i = 0; i <= kRecordsPerBlock; ++i) {
            bm.add_record(kv_u64(200 + i, 1));
        }
    };
    CHECK_THROWS_AS(fill(), std::runtime_error);
}

TEST_CASE("buffer manager matches the reference model") {
    PathOram oram(OramConfig{.capacity = 256, .block_bytes = kBlockBytes,
                             .rng_seed = 12});
    BufferManager bm(oram, 8);
    oracles::BufferModel model(8, 256);
    Xorshift64Star rng(121);

    for (int op = 0; op < 10000; ++op) {
        const uint64_t created = model.ids_created();
        if (rng.next_below(100) < 60) {
            const KVRecord rec = kv_u64(rng.next(), static_cast<uint32_t>(op));
            const uint64_t got = bm.add_record(rec);
            CHECK(got == model.add_record(rec));
        } else {
            const uint64_t id = rng.next_below(created);
            Block& real = bm.get_block(id);
            Block& want = model.get_block(id);
            REQUIRE(real == want);
            // Mutate through both references so later evictions and
            // fetches carry identical contents.
            const uint32_t v = static_cast<uint32_t>(rng.next());
            real.records[0].value = v;
            want.records[0].value = v;
        }
        CHECK(bm.working_id() == model.working_id());
        CHECK(bm.cached_ids() == model.cached_ids());
        CHECK(bm.miss_log() == model.miss_log());
    }

    bm.drain();
    model.drain();
    CHECK(bm.cached_ids().empty());
    for (uint64_t id = 0; id < model.ids_created(); ++id) {
        CHECK(oram_read_block(bm.backing(), id) == model.contents(id));
    }
}

TEST_CASE("drain keeps the working block usable") {
    PathOram oram(OramConfig{.capacity = 16, .block_bytes = kBlockBytes});
    BufferManager bm(oram);
    bm.add_record(kv_u64(1, 1));
    bm.drain();
    CHECK(oram_read_block(oram, 0).records[0] == kv_u64(1, 1));
    bm.add_record(kv_u64(2, 2));
    CHECK(bm.working_id() == 0);
    bm.drain();
    const Block b = oram_read_block(oram, 0);
    CHECK(b.record_count == 2);
    CHECK(b.records[1] == kv_u64(2, 2));
}
