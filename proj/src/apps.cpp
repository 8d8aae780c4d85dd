#include "obl/apps.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "obl/rng.hpp"

namespace obl {

uint16_t block_point_count(const Block& b) noexcept {
    uint16_t n;
    std::memcpy(&n, b.reserved, sizeof(n));
    return n;
}

void set_block_point_count(Block& b, uint16_t n) noexcept {
    std::memcpy(b.reserved, &n, sizeof(n));
}

Point block_point(const Block& b, size_t i) noexcept {
    Point p;
    std::memcpy(&p, reinterpret_cast<const uint8_t*>(b.records) + i * sizeof(Point),
                sizeof(p));
    return p;
}

void set_block_point(Block& b, size_t i, Point p) noexcept {
    std::memcpy(reinterpret_cast<uint8_t*>(b.records) + i * sizeof(Point), &p,
                sizeof(p));
}

uint64_t point_dist2(Point a, Point b) noexcept {
    const int64_t dx = int64_t{a.x} - b.x;
    const int64_t dy = int64_t{a.y} - b.y;
    const unsigned __int128 sq =
        static_cast<unsigned __int128>(static_cast<__int128>(dx) * dx) +
        static_cast<unsigned __int128>(static_cast<__int128>(dy) * dy);
    const uint64_t hi = static_cast<uint64_t>(sq >> 64);
    const uint64_t lo = static_cast<uint64_t>(sq);
    return o_select(o_equal(hi, 0), lo, ~uint64_t{0});
}

uint64_t find_nearest_centroid(Point p, std::span<const Point> means) noexcept {
    if (means.empty()) return 0;
    uint64_t best = 0;
    uint64_t best_d = point_dist2(p, means[0]);
    for (size_t j = 1; j < means.size(); ++j) {
        const uint64_t d = point_dist2(p, means[j]);
        const Mask better = o_greater(best_d, d);  // strict: ties keep lower j
        o_move(better, best_d, d);
        o_move(better, best, j);
    }
    return best;
}

// ---- MapReduce pipeline ----

namespace {

// Packs emissions into blocks one slot at a time, sentinels included, so the
// number of blocks written is a function of the emission count alone.
class BlockPacker {
public:
    explicit BlockPacker(BlockStore& out) : out_(out) {}

    void push(const KVRecord& r) {
        pack_.records[slots_++] = r;
        real_ += o_select(kv_is_sentinel(r), 0, 1);
        if (slots_ == kRecordsPerBlock) flush();
    }

    uint64_t finish() {
        if (slots_ > 0) flush();
        return blocks_;
    }

    word real_records() const noexcept { return real_; }

private:
    void flush() {
        pack_.record_count = static_cast<uint16_t>(slots_);
        out_.write_block(blocks_++, pack_);
        pack_.clear();
        slots_ = 0;
    }

    BlockStore& out_;
    Block pack_;
    size_t slots_ = 0;
    uint64_t blocks_ = 0;
    word real_ = 0;
};

}  // namespace

uint64_t mr_map_pass(
    const BlockStore& input, BlockStore& inter, size_t emissions_per_block,
    const std::function<void(const Block&, std::span<KVRecord>)>& mapper) {
    std::vector<KVRecord> em(emissions_per_block);
    BlockPacker packer(inter);
    for (uint64_t i = 0; i < input.block_count(); ++i) {
        const Block in = input.read_block(i);
        std::fill(em.begin(), em.end(), sentinel_record());
        mapper(in, std::span<KVRecord>(em));
        for (const KVRecord& r : em) packer.push(r);
    }
    return packer.finish();
}

uint64_t mr_sweep_pass(
    const BlockStore& sorted, BlockStore& out, size_t key_bytes,
    const std::function<void(KVRecord&, const KVRecord&)>& combiner) {
    BlockPacker packer(out);
    KVRecord acc = sentinel_record();
    for (uint64_t i = 0; i < sorted.block_count(); ++i) {
        const Block blk = sorted.read_block(i);
        for (size_t s = 0; s < kRecordsPerBlock; ++s) {
            const KVRecord rec = blk.records[s];
            const Mask same = kv_prefix_equal(acc, rec, key_bytes);
            const Mask fold = same & ~kv_is_sentinel(rec);
            KVRecord folded = acc;
            combiner(folded, rec);
            // at a group boundary the finished accumulator goes out, else a
            // sentinel filler keeps the emission rate at one per slot
            packer.push(kv_select(same, sentinel_record(), acc));
            acc = kv_select(fold, folded, kv_select(same, acc, rec));
        }
    }
    packer.push(acc);
    packer.finish();
    return packer.real_records();
}

MRStats mr_run(const MRJob& job) {
    if (job.input == nullptr) throw std::invalid_argument("mr_run: no input");
    if (!job.mapper || !job.combiner)
        throw std::invalid_argument("mr_run: mapper/combiner unset");
    if (job.key_bytes == 0 || job.key_bytes > 12)
        throw std::invalid_argument("mr_run: key_bytes out of range");
    if (job.emissions_per_block == 0)
        throw std::invalid_argument("mr_run: zero emissions_per_block");
    if (job.scratch_path.empty() || job.output_path.empty())
        throw std::invalid_argument("mr_run: paths unset");

    AccessTrace* sink = job.input->sink();
    MRStats st;
    st.input_blocks = job.input->block_count();

    const uint64_t emissions = st.input_blocks * job.emissions_per_block;
    st.intermediate_blocks = (emissions + kRecordsPerBlock - 1) / kRecordsPerBlock;
    BlockStore inter =
        BlockStore::create(job.scratch_path, st.intermediate_blocks, sink);
    mr_map_pass(*job.input, inter, job.emissions_per_block, job.mapper);
    st.sort_merge_splits = block_bitonic_sort(inter).merge_splits;

    // one emission per sorted slot plus the final accumulator
    st.output_blocks = st.intermediate_blocks + 1;
    BlockStore out = BlockStore::create(job.output_path, st.output_blocks, sink);
    st.output_records = mr_sweep_pass(inter, out, job.key_bytes, job.combiner);
    st.output_merge_splits = block_bitonic_sort(out).merge_splits;
    return st;
}

// ---- wordcount ----

namespace {

uint8_t lower_ascii(uint8_t c) noexcept {
    const uint8_t d = static_cast<uint8_t>(c - 'A');
    return static_cast<uint8_t>(c + ((d < 26) << 5));
}

void wc_mapper(const Block& in, std::span<KVRecord> out) {
    for (size_t s = 0; s < kRecordsPerBlock; ++s) {
        const KVRecord r = in.records[s];
        KVRecord norm = r;
        for (auto& c : norm.key) c = lower_ascii(c);
        norm.value = 1;
        out[s] = kv_select(kv_is_sentinel(r), sentinel_record(), norm);
    }
}

void wc_combiner(KVRecord& acc, const KVRecord& r) { acc.value += r.value; }

WordCountStats wordcount_unprotected(const BlockStore& input,
                                     const std::string& output_path) {
    std::map<std::array<uint8_t, 12>, uint32_t> counts;
    for (uint64_t i = 0; i < input.block_count(); ++i) {
        const Block blk = input.read_block(i);
        for (size_t s = 0; s < blk.record_count; ++s) {
            std::array<uint8_t, 12> key = blk.records[s].key;
            for (auto& c : key) c = lower_ascii(c);
            counts[key] += 1;
        }
    }
    const uint64_t real = counts.size();
    const uint64_t blocks =
        real == 0 ? 1 : (real + kRecordsPerBlock - 1) / kRecordsPerBlock;
    BlockStore out = BlockStore::create(output_path, blocks, input.sink());
    Block pack;
    uint64_t bi = 0;
    for (const auto& [key, cnt] : counts) {
        KVRecord r;
        r.key = key;
        r.value = cnt;
        pack.append(r);
        if (pack.full()) {
            out.write_block(bi++, pack);
            pack.clear();
        }
    }
    if (pack.record_count > 0) out.write_block(bi++, pack);
    return {.output_records = real, .merge_splits = 0, .intermediate_blocks = 0};
}

}  // namespace

WordCountStats wordcount(const BlockStore& input,
                         const std::string& output_path, WordCountImpl impl) {
    if (impl == WordCountImpl::Unprotected) {
        return wordcount_unprotected(input, output_path);
    }

    if (impl == WordCountImpl::Framework) {
        MRJob job;
        job.input = &input;
        job.scratch_path = output_path + ".inter";
        job.output_path = output_path;
        job.key_bytes = 12;
        job.emissions_per_block = kRecordsPerBlock;
        job.mapper = wc_mapper;
        job.combiner = wc_combiner;
        const MRStats st = mr_run(job);
        return {.output_records = st.output_records,
                .merge_splits = st.sort_merge_splits + st.output_merge_splits,
                .intermediate_blocks = st.intermediate_blocks};
    }

    // Manual: the same passes, hand wired.
    AccessTrace* sink = input.sink();
    const uint64_t emissions = input.block_count() * kRecordsPerBlock;
    const uint64_t ib = (emissions + kRecordsPerBlock - 1) / kRecordsPerBlock;
    BlockStore inter = BlockStore::create(output_path + ".inter", ib, sink);
    mr_map_pass(input, inter, kRecordsPerBlock, wc_mapper);
    const uint64_t ms1 = block_bitonic_sort(inter).merge_splits;
    BlockStore out = BlockStore::create(output_path, ib + 1, sink);
    const uint64_t real = mr_sweep_pass(inter, out, 12, wc_combiner);
    const uint64_t ms2 = block_bitonic_sort(out).merge_splits;
    return {.output_records = real,
            .merge_splits = ms1 + ms2,
            .intermediate_blocks = ib};
}

// ---- kmeans ----

namespace {

struct AggTotals {
    std::vector<int64_t> sx, sy;
    std::vector<uint64_t> cnt;

    explicit AggTotals(size_t k) : sx(k), sy(k), cnt(k) {}

    void reset() {
        std::fill(sx.begin(), sx.end(), 0);
        std::fill(sy.begin(), sy.end(), 0);
        std::fill(cnt.begin(), cnt.end(), 0);
    }
};

// Per-block local map: k fixed slots, every point slot processed, masked
// accumulation by linear scan over the slots.
void local_map_block(const Block& blk, std::span<const Point> means,
                     AggTotals& lm) {
    const word pc = block_point_count(blk);
    for (size_t t = 0; t < kPointsPerBlock; ++t) {
        const Point p = block_point(blk, t);
        const Mask valid = o_greater(pc, t);
        const uint64_t j = find_nearest_centroid(p, means);
        for (size_t c = 0; c < means.size(); ++c) {
            const Mask m = o_equal(c, j) & valid;
            lm.sx[c] += static_cast<int64_t>(
                o_select(m, static_cast<uint64_t>(int64_t{p.x}), 0));
            lm.sy[c] += static_cast<int64_t>(
                o_select(m, static_cast<uint64_t>(int64_t{p.y}), 0));
            lm.cnt[c] += o_select(m, 1, 0);
        }
    }
}

// Shared mean update; branch free and exact, so every implementation lands
// on identical fixed-point means.
void finalize_means(const AggTotals& g, std::vector<Point>& means) {
    for (size_t c = 0; c < means.size(); ++c) {
        const uint64_t n = g.cnt[c];
        const int64_t d = static_cast<int64_t>(o_max(n, 1));
        const int64_t qx = g.sx[c] / d;
        const int64_t qy = g.sy[c] / d;
        const Mask nz = o_greater(n, 0);
        means[c].x = static_cast<int32_t>(static_cast<uint32_t>(o_select(
            nz, static_cast<uint64_t>(qx),
            static_cast<uint64_t>(int64_t{means[c].x}))));
        means[c].y = static_cast<int32_t>(static_cast<uint32_t>(o_select(
            nz, static_cast<uint64_t>(qy),
            static_cast<uint64_t>(int64_t{means[c].y}))));
    }
}

std::vector<Point> initial_means(const BlockStore& input, size_t k) {
    std::vector<Point> means;
    means.reserve(k);
    for (uint64_t i = 0; i < input.block_count() && means.size() < k; ++i) {
        const Block blk = input.read_block(i);
        const uint16_t pc = block_point_count(blk);
        for (size_t t = 0; t < pc && means.size() < k; ++t) {
            means.push_back(block_point(blk, t));
        }
    }
    if (means.size() < k) {
        throw std::invalid_argument("kmeans: fewer points than clusters");
    }
    return means;
}

void aggregate_unprotected(const BlockStore& input,
                           std::span<const Point> means, AggTotals& out) {
    for (uint64_t i = 0; i < input.block_count(); ++i) {
        const Block blk = input.read_block(i);
        const uint16_t pc = block_point_count(blk);
        for (size_t t = 0; t < pc; ++t) {
            const Point p = block_point(blk, t);
            uint64_t best = 0;
            uint64_t best_d = point_dist2(p, means[0]);
            for (size_t j = 1; j < means.size(); ++j) {
                const uint64_t d = point_dist2(p, means[j]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            out.sx[best] += p.x;
            out.sy[best] += p.y;
            out.cnt[best] += 1;
        }
    }
}

void aggregate_manual(const BlockStore& input, std::span<const Point> means,
                      AggTotals& out) {
    const size_t k = means.size();
    ElementBuffer<word> acc(input.sink(), 3 * k);
    for (uint64_t i = 0; i < input.block_count(); ++i) {
        const Block blk = input.read_block(i);
        const word pc = block_point_count(blk);
        for (size_t t = 0; t < kPointsPerBlock; ++t) {
            const Point p = block_point(blk, t);
            const Mask valid = o_greater(pc, t);
            const uint64_t j = find_nearest_centroid(p, means);
            for (size_t c = 0; c < k; ++c) {
                const Mask m = o_equal(c, j) & valid;
                acc.write(3 * c + 0,
                          acc.read(3 * c + 0) +
                              o_select(m, static_cast<uint64_t>(int64_t{p.x}), 0));
                acc.write(3 * c + 1,
                          acc.read(3 * c + 1) +
                              o_select(m, static_cast<uint64_t>(int64_t{p.y}), 0));
                acc.write(3 * c + 2, acc.read(3 * c + 2) + o_select(m, 1, 0));
            }
        }
    }
    for (size_t c = 0; c < k; ++c) {
        out.sx[c] = static_cast<int64_t>(acc.read(3 * c + 0));
        out.sy[c] = static_cast<int64_t>(acc.read(3 * c + 1));
        out.cnt[c] = acc.read(3 * c + 2);
    }
}

struct CentroidAgg {
    uint64_t centroid;
    int64_t sum_x;
    int64_t sum_y;
    uint64_t count;
};
static_assert(sizeof(CentroidAgg) == 2 * kRecordBytes);

void agg_to_records(const CentroidAgg& a, KVRecord& r1, KVRecord& r2) {
    std::memcpy(static_cast<void*>(&r1), reinterpret_cast<const uint8_t*>(&a),
                kRecordBytes);
    std::memcpy(static_cast<void*>(&r2),
                reinterpret_cast<const uint8_t*>(&a) + kRecordBytes,
                kRecordBytes);
}

CentroidAgg agg_from_block(const Block& b, size_t slot) {
    CentroidAgg a;
    std::memcpy(&a, &b.records[slot], sizeof(a));
    return a;
}

void agg_into_block(Block& b, size_t slot, const CentroidAgg& a) {
    std::memcpy(static_cast<void*>(&b.records[slot]), &a, sizeof(a));
}

void aggregate_oram_hash(const BlockStore& input, std::span<const Point> means,
                         AggTotals& out, std::vector<uint64_t>& miss_seq) {
    const size_t k = means.size();
    AccessTrace* sink = input.sink();
    const uint64_t cap =
        std::max<uint64_t>(16, 2 * (3 * k / kRecordsPerBlock + 2));
    PathOram oram(
        OramConfig{
            .capacity = cap, .block_bytes = kBlockBytes, .rng_seed = 0x6f68},
        sink);
    BufferManager bm(oram);

    struct AggSlot {
        uint64_t id = 0;
        size_t slot = 0;
        bool present = false;
    };
    std::vector<AggSlot> where(k);
    AggTotals lm(k);

    for (uint64_t i = 0; i < input.block_count(); ++i) {
        const Block blk = input.read_block(i);
        lm.reset();
        local_map_block(blk, means, lm);
        for (size_t c = 0; c < k; ++c) {
            // hash-map semantics: only centroids present in this block are
            // touched, which is exactly the structural leak this variant has
            if (lm.cnt[c] == 0) continue;
            if (!where[c].present) {
                // the aggregate spans two record slots and must not straddle
                // blocks, so burn a lone free slot first
                if (bm.working_free_slots() == 1) {
                    bm.add_record(sentinel_record());
                }
                CentroidAgg agg{c, lm.sx[c], lm.sy[c], lm.cnt[c]};
                KVRecord r1, r2;
                agg_to_records(agg, r1, r2);
                const uint64_t id = bm.add_record(r1);
                bm.add_record(r2);
                const Block& b = bm.get_block(id);
                where[c] = {id, static_cast<size_t>(b.record_count - 2), true};
                bm.bind(c, id);
            } else {
                Block& b = bm.get_block(where[c].id);
                CentroidAgg agg = agg_from_block(b, where[c].slot);
                agg.sum_x += lm.sx[c];
                agg.sum_y += lm.sy[c];
                agg.count += lm.cnt[c];
                agg_into_block(b, where[c].slot, agg);
            }
        }
    }
    bm.drain();
    const auto& log = bm.miss_log();
    miss_seq.insert(miss_seq.end(), log.begin(), log.end());

    for (size_t c = 0; c < k; ++c) {
        if (!where[c].present) continue;
        const Block b = oram_read_block(oram, where[c].id);
        const CentroidAgg agg = agg_from_block(b, where[c].slot);
        out.sx[c] = agg.sum_x;
        out.sy[c] = agg.sum_y;
        out.cnt[c] = agg.count;
    }
}

KVRecord agg_kv(uint16_t centroid, uint8_t field, int64_t v) {
    KVRecord r;
    r.key[0] = static_cast<uint8_t>(centroid >> 8);
    r.key[1] = static_cast<uint8_t>(centroid & 0xFF);
    r.key[2] = field;
    r.key[3] = 0;
    std::memcpy(r.key.data() + 4, &v, 8);
    r.value = 0;
    return r;
}

void aggregate_framework(const BlockStore& input, std::span<const Point> means,
                         AggTotals& out) {
    const size_t k = means.size();
    std::vector<Point> mcopy(means.begin(), means.end());

    MRJob job;
    job.input = &input;
    job.scratch_path = input.path() + ".km_inter";
    job.output_path = input.path() + ".km_out";
    job.key_bytes = 4;
    job.emissions_per_block = 3 * k;
    job.mapper = [k, mcopy](const Block& blk, std::span<KVRecord> em) {
        AggTotals lm(k);
        local_map_block(blk, mcopy, lm);
        for (size_t c = 0; c < k; ++c) {
            em[3 * c + 0] = agg_kv(static_cast<uint16_t>(c), 0, lm.sx[c]);
            em[3 * c + 1] = agg_kv(static_cast<uint16_t>(c), 1, lm.sy[c]);
            em[3 * c + 2] = agg_kv(static_cast<uint16_t>(c), 2,
                                   static_cast<int64_t>(lm.cnt[c]));
        }
    };
    job.combiner = [](KVRecord& acc, const KVRecord& r) {
        int64_t va, vr;
        std::memcpy(&va, acc.key.data() + 4, 8);
        std::memcpy(&vr, r.key.data() + 4, 8);
        va += vr;
        std::memcpy(acc.key.data() + 4, &va, 8);
    };
    mr_run(job);

    BlockStore outs = BlockStore::open_existing(job.output_path, input.sink());
    for (uint64_t i = 0; i < outs.block_count(); ++i) {
        const Block blk = outs.read_block(i);
        for (const KVRecord& r : blk.records) {
            if (kv_is_sentinel(r).as_bool()) continue;
            const uint16_t c = static_cast<uint16_t>(r.key[0] << 8 | r.key[1]);
            if (c >= k) continue;
            int64_t v;
            std::memcpy(&v, r.key.data() + 4, 8);
            switch (r.key[2]) {
                case 0: out.sx[c] = v; break;
                case 1: out.sy[c] = v; break;
                case 2: out.cnt[c] = static_cast<uint64_t>(v); break;
                default: break;
            }
        }
    }
}

}  // namespace

KMeansResult kmeans(const BlockStore& input, size_t k, size_t iterations,
                    KMeansImpl impl) {
    if (k == 0) throw std::invalid_argument("kmeans: zero clusters");
    std::vector<Point> means = initial_means(input, k);

    KMeansResult res;
    AggTotals totals(k);
    for (size_t it = 0; it < iterations; ++it) {
        totals.reset();
        switch (impl) {
            case KMeansImpl::Unprotected:
                aggregate_unprotected(input, means, totals);
                break;
            case KMeansImpl::ManualCMOV:
                aggregate_manual(input, means, totals);
                break;
            case KMeansImpl::OramHash:
                aggregate_oram_hash(input, means, totals, res.miss_sequence);
                break;
            case KMeansImpl::Framework:
                aggregate_framework(input, means, totals);
                break;
        }
        finalize_means(totals, means);
    }
    res.means = std::move(means);
    res.counts = std::move(totals.cnt);
    return res;
}

void write_centroid_file(const std::string& path, const KMeansResult& r) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_centroid_file: cannot open " + path);
    for (size_t c = 0; c < r.means.size(); ++c) {
        const uint64_t idx = c;
        const uint64_t cnt = c < r.counts.size() ? r.counts[c] : 0;
        os.write(reinterpret_cast<const char*>(&idx), 8);
        os.write(reinterpret_cast<const char*>(&r.means[c].x), 4);
        os.write(reinterpret_cast<const char*>(&r.means[c].y), 4);
        os.write(reinterpret_cast<const char*>(&cnt), 8);
    }
    if (!os) throw std::runtime_error("write_centroid_file: short write");
}

std::vector<CentroidRow> read_centroid_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_centroid_file: cannot open " + path);
    std::vector<CentroidRow> rows;
    while (true) {
        CentroidRow row;
        char buf[24];
        is.read(buf, sizeof(buf));
        if (is.gcount() == 0 && is.eof()) break;
        if (is.gcount() != sizeof(buf)) {
            throw std::runtime_error("read_centroid_file: truncated row");
        }
        std::memcpy(&row.index, buf, 8);
        std::memcpy(&row.mean.x, buf + 8, 4);
        std::memcpy(&row.mean.y, buf + 12, 4);
        std::memcpy(&row.count, buf + 16, 8);
        rows.push_back(row);
    }
    return rows;
}

// ---- generators ----

void gen_wordcount_store(const std::string& path, uint64_t blocks,
                         uint64_t seed, size_t vocab_size) {
    if (vocab_size == 0) throw std::invalid_argument("gen: empty vocab");
    Xorshift64Star rng(seed);
    std::vector<std::string> vocab(vocab_size);
    for (auto& w : vocab) {
        const size_t len = 3 + rng.next_below(8);
        w.resize(len);
        for (auto& c : w) c = static_cast<char>('a' + rng.next_below(26));
    }
    BlockStore store = BlockStore::create(path, blocks, nullptr);
    for (uint64_t i = 0; i < blocks; ++i) {
        Block b;
        for (size_t s = 0; s < kRecordsPerBlock; ++s) {
            b.append(make_kv(vocab[rng.next_below(vocab_size)], 1));
        }
        store.write_block(i, b);
    }
}

void gen_kv_store(const std::string& path, uint64_t blocks, uint64_t seed) {
    Xorshift64Star rng(seed);
    BlockStore store = BlockStore::create(path, blocks, nullptr);
    for (uint64_t i = 0; i < blocks; ++i) {
        Block b;
        for (size_t s = 0; s < kRecordsPerBlock; ++s) {
            KVRecord r;
            for (auto& c : r.key) c = static_cast<uint8_t>('a' + rng.next_below(26));
            r.value = static_cast<uint32_t>(rng.next());
            b.append(r);
        }
        store.write_block(i, b);
    }
}

void gen_points_store(const std::string& path, uint64_t blocks,
                      uint64_t points, size_t clusters, uint64_t seed) {
    if (blocks == 0 && points > 0)
        throw std::invalid_argument("gen: points without blocks");
    if (points > blocks * kPointsPerBlock)
        throw std::invalid_argument("gen: too many points for block count");
    if (clusters == 0) throw std::invalid_argument("gen: zero clusters");

    Xorshift64Star rng(seed);
    std::vector<Point> centers(clusters);
    for (auto& c : centers) {
        c.x = static_cast<int32_t>(static_cast<int64_t>(rng.next_below(401)) - 200) *
              65536;
        c.y = static_cast<int32_t>(static_cast<int64_t>(rng.next_below(401)) - 200) *
              65536;
    }

    BlockStore store = BlockStore::create(path, blocks, nullptr);
    const uint64_t base = blocks == 0 ? 0 : points / blocks;
    const uint64_t extra = blocks == 0 ? 0 : points % blocks;
    for (uint64_t i = 0; i < blocks; ++i) {
        const uint64_t n = base + (i < extra ? 1 : 0);
        Block b;
        set_block_point_count(b, static_cast<uint16_t>(n));
        for (uint64_t t = 0; t < n; ++t) {
            const Point& c = centers[rng.next_below(clusters)];
            const int32_t spread = 8 << 16;
            Point p;
            p.x = c.x + static_cast<int32_t>(rng.next_below(2 * spread)) - spread;
            p.y = c.y + static_cast<int32_t>(rng.next_below(2 * spread)) - spread;
            set_block_point(b, t, p);
        }
        store.write_block(i, b);
    }
}

}  // namespace obl
