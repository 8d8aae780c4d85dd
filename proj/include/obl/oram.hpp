#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "obl/rng.hpp"
#include "obl/trace.hpp"

namespace obl {

struct OramConfig {
    uint64_t capacity = 0;       // addressable block ids [0, capacity)
    uint32_t block_bytes = 0;    // payload size per block
    uint32_t bucket_size = 4;    // blocks per tree bucket (Z)
    uint32_t stash_capacity = 128;
    uint64_t rng_seed = 1;
};

struct StashOverflow : std::runtime_error {
    explicit StashOverflow(uint32_t capacity)
        : std::runtime_error("PathOram: stash overflow (capacity " +
                             std::to_string(capacity) + ")") {}
};

// Non-recursive Path ORAM.  The tree and the stash live in instrumented
// buffers; the position map, scratch space and RNG state are treated as
// in-enclave memory and never touched through the trace.
//
// Every access reads the whole path for the block's old leaf plus every
// stash slot, then writes every stash slot and the whole path back, so the
// shape of the trace is a constant of the configuration:
//   levels * bucket_size + stash_capacity reads, then the same count of
//   writes.  Leaf choice is the only data-dependent part and is drawn fresh
//   and uniformly per access, which is exactly the Path ORAM guarantee.
class PathOram {
public:
    PathOram(const OramConfig& cfg, AccessTrace* sink = nullptr);

    void read(uint64_t id, std::span<uint8_t> out);
    std::vector<uint8_t> read(uint64_t id);
    void write(uint64_t id, std::span<const uint8_t> data);

    const OramConfig& config() const noexcept { return cfg_; }
    uint64_t leaves() const noexcept { return leaves_; }
    uint32_t levels() const noexcept { return levels_; }

    struct TraceShape {
        uint64_t reads_per_access;
        uint64_t writes_per_access;
    };
    TraceShape trace_shape() const noexcept {
        uint64_t n = uint64_t{levels_} * cfg_.bucket_size + cfg_.stash_capacity;
        return {n, n};
    }

    // Leaf read by the most recent access (the public part of the trace).
    uint64_t last_leaf() const noexcept { return last_leaf_; }

    uint32_t stash_occupancy() const noexcept { return stash_occupancy_; }
    uint32_t max_stash_occupancy() const noexcept { return max_stash_occupancy_; }

    // Unrecorded full scan of tree + stash; audit/test use only.
    std::vector<uint64_t> resident_ids() const;

private:
    static constexpr uint64_t kDummyId = ~uint64_t{0};

    void access(bool is_write, uint64_t id, const uint8_t* in, uint8_t* out);
    size_t node_index(uint64_t leaf, uint32_t depth) const noexcept {
        return (leaf >> (levels_ - 1 - depth)) + ((size_t{1} << depth) - 1);
    }

    OramConfig cfg_;
    uint64_t leaves_;
    uint32_t levels_;
    uint32_t slot_bytes_;   // 8-byte id header + payload
    RawBuffer tree_;        // (2 * leaves - 1) * Z slots
    RawBuffer stash_;       // stash_capacity slots
    std::vector<uint64_t> position_;
    Xorshift64Star rng_;

    uint64_t last_leaf_ = 0;
    uint32_t stash_occupancy_ = 0;
    uint32_t max_stash_occupancy_ = 0;

    // Scratch reused across accesses so steady-state runs do not allocate.
    struct PoolEntry {
        uint64_t id;
        uint64_t leaf;
        size_t slot;      // index into slot_scratch_, or npos for the target
        uint32_t depth;
        bool placed;
    };
    std::vector<uint8_t> slot_scratch_;   // path + stash image as read
    std::vector<uint8_t> write_scratch_;  // path + stash image to write back
    std::vector<PoolEntry> pool_;
    std::vector<uint8_t> target_payload_;
    std::vector<size_t> bucket_fill_;
};

}  // namespace obl
