#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "obl/oalg.hpp"
#include "obl/oprim.hpp"
#include "obl/oram.hpp"
#include "obl/trace.hpp"

namespace obl {

inline constexpr size_t kBlockBytes = 1024;
inline constexpr size_t kBlockHeaderBytes = 16;
inline constexpr size_t kRecordBytes = 16;
inline constexpr size_t kRecordsPerBlock =
    (kBlockBytes - kBlockHeaderBytes) / kRecordBytes;  // 63

// 16-byte key/value record.  The key is 12 raw bytes compared as a
// big-endian unsigned integer; an all-0xFF key marks an unused slot and is
// reserved (no real record may use it).
struct KVRecord {
    std::array<uint8_t, 12> key{};
    uint32_t value = 0;

    friend bool operator==(const KVRecord&, const KVRecord&) = default;
};
static_assert(sizeof(KVRecord) == kRecordBytes);

KVRecord make_kv(std::string_view key, uint32_t value);
std::string kv_key_string(const KVRecord& r);  // trailing NULs stripped

inline constexpr KVRecord sentinel_record() noexcept {
    KVRecord r;
    r.key.fill(0xFF);
    r.value = 0;
    return r;
}

inline uint64_t kv_key_hi(const KVRecord& r) noexcept {
    uint64_t v;
    __builtin_memcpy(&v, r.key.data(), 8);
    return __builtin_bswap64(v);
}

inline uint64_t kv_key_lo(const KVRecord& r) noexcept {
    uint32_t v;
    __builtin_memcpy(&v, r.key.data() + 8, 4);
    return __builtin_bswap32(v);
}

inline Mask kv_greater(const KVRecord& a, const KVRecord& b) noexcept {
    const uint64_t ah = kv_key_hi(a), bh = kv_key_hi(b);
    return o_greater(ah, bh) |
           (o_equal(ah, bh) & o_greater(kv_key_lo(a), kv_key_lo(b)));
}

// Equality of the first prefix_bytes of the keys (prefix_bytes <= 12, public).
inline Mask kv_prefix_equal(const KVRecord& a, const KVRecord& b,
                            size_t prefix_bytes) noexcept {
    const uint64_t hi_bits = prefix_bytes >= 8 ? 64 : prefix_bytes * 8;
    const uint64_t lo_bits = prefix_bytes >= 8 ? (prefix_bytes - 8) * 8 : 0;
    const uint64_t hi_mask = hi_bits == 0 ? 0 : ~uint64_t{0} << (64 - hi_bits);
    const uint64_t lo_mask = lo_bits == 0 ? 0 : ~uint64_t{0} << (64 - lo_bits);
    return o_equal(kv_key_hi(a) & hi_mask, kv_key_hi(b) & hi_mask) &
           o_equal((kv_key_lo(a) << 32) & lo_mask,
                   (kv_key_lo(b) << 32) & lo_mask);
}

inline Mask kv_is_sentinel(const KVRecord& r) noexcept {
    return kv_prefix_equal(r, sentinel_record(), 12);
}

void kv_swap(Mask c, KVRecord& a, KVRecord& b) noexcept;
KVRecord kv_select(Mask c, const KVRecord& a, const KVRecord& b) noexcept;

// 1-KB block: 16-byte header (count + reserved), then 63 record slots.
// KV blocks keep sentinel records in every slot at index >= record_count;
// sort and merge inputs rely on that.  (Point blocks reuse the record area
// differently, see apps.)
struct Block {
    uint16_t record_count;
    uint8_t reserved[14];
    KVRecord records[kRecordsPerBlock];

    Block() noexcept { clear(); }

    void clear() noexcept {
        record_count = 0;
        for (auto& b : reserved) b = 0;
        for (auto& r : records) r = sentinel_record();
    }

    bool full() const noexcept { return record_count >= kRecordsPerBlock; }

    void append(const KVRecord& r) {
        if (full()) throw std::length_error("Block: append to full block");
        records[record_count++] = r;
    }

    friend bool operator==(const Block&, const Block&) = default;
};
static_assert(sizeof(Block) == kBlockBytes);
static_assert(std::is_trivially_copyable_v<Block>);

// File-backed sequence of raw blocks; the file is the block images
// concatenated, nothing else.  Each block read/write is one trace event of
// width kBlockBytes.
class BlockStore {
public:
    static BlockStore create(const std::string& path, uint64_t blocks,
                             AccessTrace* sink);
    static BlockStore open_existing(const std::string& path, AccessTrace* sink);

    BlockStore(BlockStore&&) = default;
    BlockStore& operator=(BlockStore&&) = default;

    Block read_block(uint64_t i) const;
    void write_block(uint64_t i, const Block& b);

    // Grows with empty blocks / truncates; used for sort padding.
    void resize(uint64_t blocks);

    uint64_t block_count() const noexcept { return count_; }
    const std::string& path() const noexcept { return path_; }
    RegionId region() const noexcept { return region_; }
    AccessTrace* sink() const noexcept { return sink_; }

    bool recording() const noexcept { return recording_; }
    void set_recording(bool on) noexcept { recording_ = on; }

private:
    BlockStore(std::string path, uint64_t count, AccessTrace* sink);

    void record(AccessKind kind, uint64_t i) const;

    std::string path_;
    uint64_t count_;
    AccessTrace* sink_;
    RegionId region_;
    bool recording_ = true;
    mutable std::fstream file_;
};

// block with the secret id via one full scan; every block is read, the match
// is folded in with byte masks.  Missing ids yield an all-zero image.
Block o_block_access_linear(const BlockStore& store, uint64_t secret_id);

Block oram_read_block(PathOram& o, uint64_t id);
void oram_write_block(PathOram& o, uint64_t id, const Block& b);

// Block-granular ORAM: a PathOram with kBlockBytes payloads.
class BlockOram {
public:
    BlockOram(uint64_t capacity, uint64_t rng_seed, AccessTrace* sink);

    // Seeds the ORAM with every block of the store (setup, typically not
    // part of a timed region).
    static BlockOram from_store(const BlockStore& store, uint64_t rng_seed,
                                AccessTrace* sink);

    Block read_block(uint64_t id) { return oram_read_block(oram_, id); }
    void write_block(uint64_t id, const Block& b) {
        oram_write_block(oram_, id, b);
    }

    PathOram& oram() noexcept { return oram_; }

private:
    PathOram oram_;
};

// Sorts the 63 record slots of one block ascending by key (sentinels sink to
// the tail); record_count is unchanged.
void sort_block_records(Block& b);

// Bitonic merge of two internally ascending blocks.  Afterwards both blocks
// are ascending again and every key in the low block is <= every key in the
// high block; low_to_a picks which block receives the low half.
void merge_split(Block& a, Block& b, bool low_to_a = true);

struct BlockSortStats {
    uint64_t merge_splits = 0;
    uint64_t block_presorts = 0;
};

// External bitonic sort of the whole store: per-block presort, then the
// bitonic network over blocks with merge_split as the comparator.  The store
// ends globally ascending by key with all sentinels in the tail blocks.
BlockSortStats block_bitonic_sort(BlockStore& store);

inline constexpr uint64_t merge_split_count(uint64_t blocks) noexcept {
    return bitonic_comparator_count(blocks);
}

// Branching twin: read everything, std::sort, repack densely.
void unprotected_block_sort(BlockStore& store);

// Working block + bounded LRU block cache in enclave memory, backed by a
// block-granular ORAM, plus a key -> block-id index.  References returned by
// get_block stay valid only until the next call on the manager.
class BufferManager {
public:
    static constexpr size_t kDefaultCacheBlocks = 32;

    BufferManager(PathOram& backing, size_t cache_blocks = kDefaultCacheBlocks);

    // The block currently addressed by id: the working block, a cache hit,
    // or a cache miss served from the ORAM (evicting the least recently
    // used cached block if the cache is full).
    Block& get_block(uint64_t id);

    // Appends to the working block, rolling it into the cache and starting a
    // fresh block when full.  Returns the id the record landed in.
    uint64_t add_record(const KVRecord& rec);

    // Flushes working block and cache to the ORAM; the cache empties, the
    // working block stays resident.
    void drain();

    uint64_t working_id() const noexcept { return working_id_; }
    size_t working_free_slots() const noexcept {
        return kRecordsPerBlock - working_.record_count;
    }
    size_t cache_capacity() const noexcept { return cache_capacity_; }

    void bind(uint64_t key, uint64_t block_id) { index_[key] = block_id; }
    std::optional<uint64_t> lookup(uint64_t key) const {
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    const std::unordered_map<uint64_t, uint64_t>& index() const noexcept {
        return index_;
    }

    // Ids fetched from the ORAM on cache misses, in order.
    const std::vector<uint64_t>& miss_log() const noexcept { return miss_log_; }

    // Cached ids, least recently used first; audit/test use.
    std::vector<uint64_t> cached_ids() const;

    PathOram& backing() noexcept { return oram_; }

private:
    struct CacheEntry {
        uint64_t id;
        uint64_t tick;
        Block block;
    };

    uint64_t alloc_block_id();
    void evict_lru();

    PathOram& oram_;
    size_t cache_capacity_;
    std::vector<CacheEntry> cache_;
    Block working_;
    uint64_t working_id_;
    uint64_t next_id_;
    uint64_t tick_ = 0;
    std::vector<uint64_t> miss_log_;
    std::unordered_map<uint64_t, uint64_t> index_;
};

}  // namespace obl
