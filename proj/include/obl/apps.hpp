#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "obl/blocks.hpp"

namespace obl {

// Plane coordinate in 16.16 fixed point.  Fixed point keeps every kmeans
// implementation bit-exact against the others, which floating point would
// not survive across different accumulation orders.
struct Point {
    int32_t x = 0;
    int32_t y = 0;

    friend bool operator==(const Point&, const Point&) = default;
};
static_assert(sizeof(Point) == 8);

inline constexpr int32_t to_fix(double v) noexcept {
    return static_cast<int32_t>(v * 65536.0);
}
inline constexpr double from_fix(int32_t v) noexcept { return v / 65536.0; }

inline constexpr size_t kPointsPerBlock =
    (kBlockBytes - kBlockHeaderBytes) / sizeof(Point);  // 126

// Point blocks reuse the record area as a packed Point array and keep their
// point count in the first two reserved header bytes; record_count stays 0
// since the KV slot invariant does not apply to them.
uint16_t block_point_count(const Block& b) noexcept;
void set_block_point_count(Block& b, uint16_t n) noexcept;
Point block_point(const Block& b, size_t i) noexcept;
void set_block_point(Block& b, size_t i, Point p) noexcept;

// Squared Euclidean distance in raw fixed-point units, saturated to the
// uint64 range; branch free, shared by every kmeans implementation.
uint64_t point_dist2(Point a, Point b) noexcept;

// Index of the nearest mean, ties to the lowest index.  Scans every mean
// with masked updates regardless of the point.
uint64_t find_nearest_centroid(Point p, std::span<const Point> means) noexcept;

// ---- mini MapReduce over block stores ----
//
// The mapper sees one input block and must fill its whole output span (one
// slot per emission, sentinel for unused slots) so the emission count per
// block is a public constant.  The combiner folds the second record into the
// first for records whose first key_bytes agree; it runs unconditionally
// under masks, so it must itself be branch free on secret data.
struct MRJob {
    const BlockStore* input = nullptr;
    std::string scratch_path;
    std::string output_path;
    size_t key_bytes = 12;
    size_t emissions_per_block = kRecordsPerBlock;
    std::function<void(const Block&, std::span<KVRecord>)> mapper;
    std::function<void(KVRecord&, const KVRecord&)> combiner;
};

struct MRStats {
    uint64_t input_blocks = 0;
    uint64_t intermediate_blocks = 0;
    uint64_t output_blocks = 0;
    uint64_t sort_merge_splits = 0;
    uint64_t output_merge_splits = 0;
    uint64_t output_records = 0;
};

// map -> oblivious block sort -> grouping sweep -> oblivious block sort.
// The trace shape depends only on (input block count, emissions_per_block);
// the real output count lands in stats, the output store stays padded.
MRStats mr_run(const MRJob& job);

// Pipeline passes, exposed so hand-wired apps can drive them directly.
uint64_t mr_map_pass(const BlockStore& input, BlockStore& inter,
                     size_t emissions_per_block,
                     const std::function<void(const Block&, std::span<KVRecord>)>& mapper);
uint64_t mr_sweep_pass(const BlockStore& sorted, BlockStore& out,
                       size_t key_bytes,
                       const std::function<void(KVRecord&, const KVRecord&)>& combiner);

enum class WordCountImpl { Unprotected, Manual, Framework };

struct WordCountStats {
    uint64_t output_records = 0;
    uint64_t merge_splits = 0;
    uint64_t intermediate_blocks = 0;
};

// Counts exact 12-byte keys (ASCII-lowercased) of the input store into
// (key, count) records at output_path.  Oblivious variants leave the output
// sentinel-padded; Unprotected writes only real records.
WordCountStats wordcount(const BlockStore& input,
                         const std::string& output_path, WordCountImpl impl);

enum class KMeansImpl { Unprotected, ManualCMOV, OramHash, Framework };

struct KMeansResult {
    std::vector<Point> means;
    std::vector<uint64_t> counts;
    // OramHash only: block ids missed by the buffer cache, in order.
    std::vector<uint64_t> miss_sequence;
};

// Lloyd iterations over a point-block store.  Initial means are the first k
// points in block order; a cluster that receives no points keeps its mean.
// All four implementations return bit-identical means and counts.
KMeansResult kmeans(const BlockStore& input, size_t k, size_t iterations,
                    KMeansImpl impl);

struct CentroidRow {
    uint64_t index;
    Point mean;
    uint64_t count;

    friend bool operator==(const CentroidRow&, const CentroidRow&) = default;
};

void write_centroid_file(const std::string& path, const KMeansResult& r);
std::vector<CentroidRow> read_centroid_file(const std::string& path);

// ---- deterministic input generators ----

void gen_wordcount_store(const std::string& path, uint64_t blocks,
                         uint64_t seed, size_t vocab_size = 500);
void gen_kv_store(const std::string& path, uint64_t blocks, uint64_t seed);
void gen_points_store(const std::string& path, uint64_t blocks,
                      uint64_t points, size_t clusters, uint64_t seed);

}  // namespace obl
