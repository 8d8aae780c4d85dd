#include "obl/blocks.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>

namespace obl {

namespace {

void lane_copy(const void* src, uint64_t* lanes, size_t n) {
    std::memcpy(lanes, src, n * sizeof(uint64_t));
}

}  // namespace

KVRecord make_kv(std::string_view key, uint32_t value) {
    KVRecord r;
    const size_t n = key.size() < 12 ? key.size() : 12;
    std::memcpy(r.key.data(), key.data(), n);
    std::memset(r.key.data() + n, 0, 12 - n);
    r.value = value;
    return r;
}

std::string kv_key_string(const KVRecord& r) {
    size_t n = 12;
    while (n > 0 && r.key[n - 1] == 0) --n;
    return std::string(reinterpret_cast<const char*>(r.key.data()), n);
}

void kv_swap(Mask c, KVRecord& a, KVRecord& b) noexcept {
    uint64_t la[2], lb[2];
    lane_copy(&a, la, 2);
    lane_copy(&b, lb, 2);
    o_swap(c, la[0], lb[0]);
    o_swap(c, la[1], lb[1]);
    std::memcpy(&a, la, sizeof(a));
    std::memcpy(&b, lb, sizeof(b));
}

KVRecord kv_select(Mask c, const KVRecord& a, const KVRecord& b) noexcept {
    uint64_t la[2], lb[2];
    lane_copy(&a, la, 2);
    lane_copy(&b, lb, 2);
    KVRecord out;
    uint64_t lo[2] = {o_select(c, la[0], lb[0]), o_select(c, la[1], lb[1])};
    std::memcpy(&out, lo, sizeof(out));
    return out;
}

BlockStore::BlockStore(std::string path, uint64_t count, AccessTrace* sink)
    : path_(std::move(path)),
      count_(count),
      sink_(sink),
      region_(sink ? sink->new_region() : 0) {
    file_.open(path_, std::ios::in | std::ios::out | std::ios::binary);
    if (!file_) throw std::runtime_error("BlockStore: cannot open " + path_);
}

BlockStore BlockStore::create(const std::string& path, uint64_t blocks,
                              AccessTrace* sink) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("BlockStore: cannot create " + path);
        Block empty;
        for (uint64_t i = 0; i < blocks; ++i) {
            out.write(reinterpret_cast<const char*>(&empty), sizeof(empty));
        }
        if (!out) throw std::runtime_error("BlockStore: short write " + path);
    }
    return BlockStore(path, blocks, sink);
}

BlockStore BlockStore::open_existing(const std::string& path,
                                     AccessTrace* sink) {
    const auto bytes = std::filesystem::file_size(path);
    if (bytes % kBlockBytes != 0) {
        throw std::runtime_error("BlockStore: " + path +
                                 " is not a whole number of blocks");
    }
    return BlockStore(path, bytes / kBlockBytes, sink);
}

void BlockStore::record(AccessKind kind, uint64_t i) const {
    if (recording_ && sink_ && trace_recording_enabled()) {
        sink_->append({kind, region_, i, kBlockBytes});
    }
}

Block BlockStore::read_block(uint64_t i) const {
    if (i >= count_) {
        throw std::out_of_range("BlockStore: block " + std::to_string(i) +
                                " out of range");
    }
    record(AccessKind::Read, i);
    Block b;
    file_.seekg(static_cast<std::streamoff>(i * kBlockBytes));
    file_.read(reinterpret_cast<char*>(&b), sizeof(b));
    if (!file_) throw std::runtime_error("BlockStore: read failed");
    return b;
}

void BlockStore::write_block(uint64_t i, const Block& b) {
    if (i >= count_) {
        throw std::out_of_range("BlockStore: block " + std::to_string(i) +
                                " out of range");
    }
    record(AccessKind::Write, i);
    file_.seekp(static_cast<std::streamoff>(i * kBlockBytes));
    file_.write(reinterpret_cast<const char*>(&b), sizeof(b));
    file_.flush();
    if (!file_) throw std::runtime_error("BlockStore: write failed");
}

void BlockStore::resize(uint64_t blocks) {
    if (blocks == count_) return;
    if (blocks > count_) {
        Block empty;
        file_.seekp(static_cast<std::streamoff>(count_ * kBlockBytes));
        for (uint64_t i = count_; i < blocks; ++i) {
            file_.write(reinterpret_cast<const char*>(&empty), sizeof(empty));
        }
        file_.flush();
        if (!file_) throw std::runtime_error("BlockStore: resize failed");
    } else {
        file_.close();
        std::filesystem::resize_file(path_, blocks * kBlockBytes);
        file_.open(path_, std::ios::in | std::ios::out | std::ios::binary);
        if (!file_) throw std::runtime_error("BlockStore: reopen failed");
    }
    count_ = blocks;
}

Block o_block_access_linear(const BlockStore& store, uint64_t secret_id) {
    uint64_t acc[kBlockBytes / 8] = {};
    uint64_t lanes[kBlockBytes / 8];
    for (uint64_t i = 0; i < store.block_count(); ++i) {
        const Block b = store.read_block(i);
        std::memcpy(lanes, &b, sizeof(lanes));
        const Mask m = o_equal(i, secret_id);
        for (size_t l = 0; l < kBlockBytes / 8; ++l) {
            acc[l] = o_select(m, lanes[l], acc[l]);
        }
    }
    Block out;
    std::memcpy(&out, acc, sizeof(out));
    return out;
}

Block oram_read_block(PathOram& o, uint64_t id) {
    Block b;
    o.read(id, std::span<uint8_t>(reinterpret_cast<uint8_t*>(&b), sizeof(b)));
    return b;
}

void oram_write_block(PathOram& o, uint64_t id, const Block& b) {
    o.write(id, std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(&b),
                                         sizeof(b)));
}

BlockOram::BlockOram(uint64_t capacity, uint64_t rng_seed, AccessTrace* sink)
    : oram_(OramConfig{.capacity = capacity,
                       .block_bytes = kBlockBytes,
                       .rng_seed = rng_seed},
            sink) {}

BlockOram BlockOram::from_store(const BlockStore& store, uint64_t rng_seed,
                                AccessTrace* sink) {
    BlockOram bo(store.block_count(), rng_seed, sink);
    for (uint64_t i = 0; i < store.block_count(); ++i) {
        bo.write_block(i, store.read_block(i));
    }
    return bo;
}

void sort_block_records(Block& b) {
    KVRecord scratch[kRecordsPerBlock + 1];
    std::memcpy(scratch, b.records, sizeof(b.records));
    scratch[kRecordsPerBlock] = sentinel_record();

    constexpr size_t n = kRecordsPerBlock + 1;  // 64
    for (size_t k = 2; k <= n; k <<= 1) {
        for (size_t j = k >> 1; j > 0; j >>= 1) {
            for (size_t i = 0; i < n; ++i) {
                const size_t l = i ^ j;
                if (l <= i) continue;
                const bool up = (i & k) == 0;
                kv_swap(up ? kv_greater(scratch[i], scratch[l])
                           : kv_greater(scratch[l], scratch[i]),
                        scratch[i], scratch[l]);
            }
        }
    }
    std::memcpy(b.records, scratch, sizeof(b.records));
}

void merge_split(Block& a, Block& b, bool low_to_a) {
    constexpr size_t half = kRecordsPerBlock + 1;  // 64
    constexpr size_t n = 2 * half;                 // 128
    KVRecord m[n];

    std::memcpy(m, a.records, sizeof(a.records));
    m[kRecordsPerBlock] = sentinel_record();
    // Second half reversed so the concatenation is bitonic.
    m[half] = sentinel_record();
    for (size_t t = 0; t < kRecordsPerBlock; ++t) {
        m[half + 1 + t] = b.records[kRecordsPerBlock - 1 - t];
    }

    for (size_t j = half; j > 0; j >>= 1) {
        for (size_t i = 0; i < n; ++i) {
            const size_t l = i ^ j;
            if (l <= i) continue;
            kv_swap(kv_greater(m[i], m[l]), m[i], m[l]);
        }
    }

    // The two injected sentinels are the global maxima, so slots 126..127
    // hold only all-0xFF records and dropping them loses nothing.
    KVRecord* lo = m;
    KVRecord* hi = m + kRecordsPerBlock;
    std::memcpy(low_to_a ? a.records : b.records, lo, sizeof(a.records));
    std::memcpy(low_to_a ? b.records : a.records, hi, sizeof(b.records));

    auto recount = [](Block& blk) {
        word cnt = 0;
        for (const KVRecord& r : blk.records) {
            cnt += o_select(kv_is_sentinel(r), 0, 1);
        }
        blk.record_count = static_cast<uint16_t>(cnt);
    };
    recount(a);
    recount(b);
}

BlockSortStats block_bitonic_sort(BlockStore& store) {
    BlockSortStats stats;
    const uint64_t orig = store.block_count();
    if (orig == 0) return stats;

    for (uint64_t i = 0; i < orig; ++i) {
        Block b = store.read_block(i);
        sort_block_records(b);
        store.write_block(i, b);
        ++stats.block_presorts;
    }
    if (orig == 1) return stats;

    const uint64_t p = std::bit_ceil(orig);
    if (p != orig) store.resize(p);

    for (uint64_t k = 2; k <= p; k <<= 1) {
        for (uint64_t j = k >> 1; j > 0; j >>= 1) {
            for (uint64_t i = 0; i < p; ++i) {
                const uint64_t l = i ^ j;
                if (l <= i) continue;
                Block a = store.read_block(i);
                Block b = store.read_block(l);
                merge_split(a, b, (i & k) == 0);
                store.write_block(i, a);
                store.write_block(l, b);
                ++stats.merge_splits;
            }
        }
    }

    if (p != orig) store.resize(orig);
    return stats;
}

void unprotected_block_sort(BlockStore& store) {
    std::vector<KVRecord> recs;
    recs.reserve(store.block_count() * kRecordsPerBlock);
    for (uint64_t i = 0; i < store.block_count(); ++i) {
        const Block b = store.read_block(i);
        for (size_t s = 0; s < b.record_count; ++s) {
            if (!kv_is_sentinel(b.records[s]).as_bool()) {
                recs.push_back(b.records[s]);
            }
        }
    }
    std::sort(recs.begin(), recs.end(), [](const KVRecord& a, const KVRecord& b) {
        const uint64_t ah = kv_key_hi(a), bh = kv_key_hi(b);
        if (ah != bh) return ah < bh;
        return kv_key_lo(a) < kv_key_lo(b);
    });

    Block pack;
    uint64_t bi = 0;
    for (const KVRecord& r : recs) {
        pack.append(r);
        if (pack.full()) {
            store.write_block(bi++, pack);
            pack.clear();
        }
    }
    if (pack.record_count > 0) {
        store.write_block(bi++, pack);
        pack.clear();
    }
    for (; bi < store.block_count(); ++bi) store.write_block(bi, pack);
}

BufferManager::BufferManager(PathOram& backing, size_t cache_blocks)
    : oram_(backing), cache_capacity_(cache_blocks) {
    if (cache_blocks == 0)
        throw std::invalid_argument("BufferManager: zero cache");
    cache_.reserve(cache_blocks);
    working_id_ = 0;
    next_id_ = 1;
}

uint64_t BufferManager::alloc_block_id() {
    if (next_id_ >= oram_.config().capacity) {
        throw std::runtime_error("BufferManager: block ids exhausted");
    }
    return next_id_++;
}

void BufferManager::evict_lru() {
    size_t victim = 0;
    for (size_t i = 1; i < cache_.size(); ++i) {
        if (cache_[i].tick < cache_[victim].tick) victim = i;
    }
    oram_write_block(oram_, cache_[victim].id, cache_[victim].block);
    cache_.erase(cache_.begin() + static_cast<ptrdiff_t>(victim));
}

Block& BufferManager::get_block(uint64_t id) {
    if (id == working_id_) return working_;
    for (CacheEntry& e : cache_) {
        if (e.id == id) {
            e.tick = ++tick_;
            return e.block;
        }
    }
    miss_log_.push_back(id);
    if (cache_.size() == cache_capacity_) evict_lru();
    cache_.push_back({id, ++tick_, oram_read_block(oram_, id)});
    return cache_.back().block;
}

uint64_t BufferManager::add_record(const KVRecord& rec) {
    if (working_.full()) {
        if (cache_.size() == cache_capacity_) evict_lru();
        cache_.push_back({working_id_, ++tick_, working_});
        working_.clear();
        working_id_ = alloc_block_id();
    }
    working_.append(rec);
    return working_id_;
}

void BufferManager::drain() {
    for (const CacheEntry& e : cache_) {
        oram_write_block(oram_, e.id, e.block);
    }
    cache_.clear();
    oram_write_block(oram_, working_id_, working_);
}

std::vector<uint64_t> BufferManager::cached_ids() const {
    std::vector<const CacheEntry*> order;
    order.reserve(cache_.size());
    for (const CacheEntry& e : cache_) order.push_back(&e);
    std::sort(order.begin(), order.end(),
              [](const CacheEntry* a, const CacheEntry* b) {
                  return a->tick < b->tick;
              });
    std::vector<uint64_t> ids;
    ids.reserve(order.size());
    for (const CacheEntry* e : order) ids.push_back(e->id);
    return ids;
}

}  // namespace obl
