#include "obl/oram.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>

namespace obl {

namespace {

constexpr size_t kTargetSlot = std::numeric_limits<size_t>::max();

const OramConfig& validate(const OramConfig& cfg) {
    if (cfg.capacity == 0) throw std::invalid_argument("PathOram: zero capacity");
    if (cfg.block_bytes == 0)
        throw std::invalid_argument("PathOram: zero block_bytes");
    if (cfg.bucket_size == 0)
        throw std::invalid_argument("PathOram: zero bucket_size");
    if (cfg.stash_capacity < cfg.bucket_size)
        throw std::invalid_argument(
            "PathOram: stash_capacity below bucket_size");
    return cfg;
}

uint64_t leaves_for(uint64_t capacity) {
    return std::bit_ceil(capacity < 2 ? uint64_t{2} : capacity);
}

uint64_t load_id(const uint8_t* slot) {
    uint64_t id;
    std::memcpy(&id, slot, sizeof(id));
    return id;
}

void store_id(uint8_t* slot, uint64_t id) {
    std::memcpy(slot, &id, sizeof(id));
}

}  // namespace

PathOram::PathOram(const OramConfig& cfg, AccessTrace* sink)
    : cfg_(validate(cfg)),
      leaves_(leaves_for(cfg_.capacity)),
      levels_(static_cast<uint32_t>(std::countr_zero(leaves_)) + 1),
      slot_bytes_(8 + cfg_.block_bytes),
      tree_(sink, (2 * leaves_ - 1) * cfg_.bucket_size, slot_bytes_),
      stash_(sink, cfg_.stash_capacity, slot_bytes_),
      rng_(cfg_.rng_seed) {
    for (size_t i = 0; i < tree_.len(); ++i) {
        store_id(tree_.raw().data() + i * slot_bytes_, kDummyId);
    }
    for (size_t i = 0; i < stash_.len(); ++i) {
        store_id(stash_.raw().data() + i * slot_bytes_, kDummyId);
    }
    position_.resize(cfg_.capacity);
    for (uint64_t id = 0; id < cfg_.capacity; ++id) {
        position_[id] = rng_.next() & (leaves_ - 1);
    }

    const size_t pool_slots =
        size_t{levels_} * cfg_.bucket_size + cfg_.stash_capacity;
    slot_scratch_.resize(pool_slots * slot_bytes_);
    write_scratch_.resize(pool_slots * slot_bytes_);
    pool_.reserve(pool_slots + 1);
    target_payload_.resize(cfg_.block_bytes);
    bucket_fill_.resize(levels_);
}

void PathOram::read(uint64_t id, std::span<uint8_t> out) {
    if (out.size() != cfg_.block_bytes)
        throw std::invalid_argument("PathOram::read: bad span size");
    access(false, id, nullptr, out.data());
}

std::vector<uint8_t> PathOram::read(uint64_t id) {
    std::vector<uint8_t> out(cfg_.block_bytes);
    access(false, id, nullptr, out.data());
    return out;
}

void PathOram::write(uint64_t id, std::span<const uint8_t> data) {
    if (data.size() != cfg_.block_bytes)
        throw std::invalid_argument("PathOram::write: bad span size");
    access(true, id, data.data(), nullptr);
}

void PathOram::access(bool is_write, uint64_t id, const uint8_t* in,
                      uint8_t* out) {
    if (id >= cfg_.capacity)
        throw std::out_of_range("PathOram: block id " + std::to_string(id) +
                                " out of range");

    const uint32_t Z = cfg_.bucket_size;
    const uint32_t cap = cfg_.stash_capacity;
    const size_t path_slots = size_t{levels_} * Z;

    const uint64_t old_leaf = position_[id];
    last_leaf_ = old_leaf;
    position_[id] = rng_.next() & (leaves_ - 1);

    // Fixed-shape read phase: whole path root to leaf, then every stash slot.
    for (uint32_t d = 0; d < levels_; ++d) {
        const size_t base = node_index(old_leaf, d) * Z;
        for (uint32_t z = 0; z < Z; ++z) {
            tree_.read(base + z,
                       slot_scratch_.data() + (size_t{d} * Z + z) * slot_bytes_);
        }
    }
    for (uint32_t s = 0; s < cap; ++s) {
        stash_.read(s, slot_scratch_.data() + (path_slots + s) * slot_bytes_);
    }

    // Everything below operates on in-enclave scratch; branching here is not
    // observable through the trace.
    pool_.clear();
    bool found = false;
    std::fill(target_payload_.begin(), target_payload_.end(), uint8_t{0});
    for (size_t k = 0; k < path_slots + cap; ++k) {
        const uint8_t* slot = slot_scratch_.data() + k * slot_bytes_;
        const uint64_t sid = load_id(slot);
        if (sid == kDummyId) continue;
        if (sid == id) {
            std::memcpy(target_payload_.data(), slot + 8, cfg_.block_bytes);
            found = true;
            continue;
        }
        pool_.push_back({sid, position_[sid], k, 0, false});
    }
    (void)found;

    if (is_write) {
        std::memcpy(target_payload_.data(), in, cfg_.block_bytes);
    } else {
        std::memcpy(out, target_payload_.data(), cfg_.block_bytes);
    }
    pool_.push_back({id, position_[id], kTargetSlot, 0, false});

    // Greedy eviction, deepest bucket first, onto the path just read.
    std::fill(bucket_fill_.begin(), bucket_fill_.end(), size_t{0});
    for (uint32_t d = levels_; d-- > 0;) {
        const size_t path_node = node_index(old_leaf, d);
        for (PoolEntry& e : pool_) {
            if (e.placed || bucket_fill_[d] == Z) continue;
            if (node_index(e.leaf, d) == path_node) {
                e.placed = true;
                e.depth = d;
                ++bucket_fill_[d];
            }
        }
    }

    size_t overflow = 0;
    for (const PoolEntry& e : pool_) {
        if (!e.placed) ++overflow;
    }
    if (overflow > cap) throw StashOverflow(cap);
    stash_occupancy_ = static_cast<uint32_t>(overflow);
    max_stash_occupancy_ = std::max(max_stash_occupancy_, stash_occupancy_);

    // Build the write-back image: dummies everywhere, then placed blocks into
    // their buckets and leftovers into the stash prefix.
    for (size_t k = 0; k < path_slots + cap; ++k) {
        uint8_t* slot = write_scratch_.data() + k * slot_bytes_;
        store_id(slot, kDummyId);
        std::memset(slot + 8, 0, cfg_.block_bytes);
    }
    std::fill(bucket_fill_.begin(), bucket_fill_.end(), size_t{0});
    size_t stash_cursor = 0;
    for (const PoolEntry& e : pool_) {
        size_t k;
        if (e.placed) {
            k = size_t{e.depth} * Z + bucket_fill_[e.depth]++;
        } else {
            k = path_slots + stash_cursor++;
        }
        uint8_t* slot = write_scratch_.data() + k * slot_bytes_;
        store_id(slot, e.id);
        const uint8_t* payload = e.slot == kTargetSlot
                                     ? target_payload_.data()
                                     : slot_scratch_.data() + e.slot * slot_bytes_ + 8;
        std::memcpy(slot + 8, payload, cfg_.block_bytes);
    }

    // Fixed-shape write phase: every stash slot, then the path leaf to root.
    for (uint32_t s = 0; s < cap; ++s) {
        stash_.write(s, write_scratch_.data() + (path_slots + s) * slot_bytes_);
    }
    for (uint32_t d = levels_; d-- > 0;) {
        const size_t base = node_index(old_leaf, d) * Z;
        for (uint32_t z = 0; z < Z; ++z) {
            tree_.write(base + z,
                        write_scratch_.data() + (size_t{d} * Z + z) * slot_bytes_);
        }
    }
}

std::vector<uint64_t> PathOram::resident_ids() const {
    std::vector<uint64_t> ids;
    auto scan = [&](const RawBuffer& buf) {
        for (size_t i = 0; i < buf.len(); ++i) {
            const uint64_t id = load_id(buf.raw_elem(i));
            if (id != kDummyId) ids.push_back(id);
        }
    };
    scan(tree_);
    scan(stash_);
    return ids;
}

}  // namespace obl
