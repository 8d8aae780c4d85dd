#include "obl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "obl/apps.hpp"
#include "obl/blocks.hpp"
#include "obl/oalg.hpp"
#include "obl/oprim.hpp"
#include "obl/oram.hpp"
#include "obl/rng.hpp"

namespace obl::bench {

namespace {

struct KindName {
    Kind kind;
    std::string_view name;
};
constexpr KindName kKinds[] = {
    {Kind::ArrayAccess, "ArrayAccess"}, {Kind::Branching, "Branching"},
    {Kind::Sort, "Sort"},               {Kind::BlockAccess, "BlockAccess"},
    {Kind::BlockSort, "BlockSort"},     {Kind::EditDistance, "EditDistance"},
    {Kind::FloydWarshall, "FloydWarshall"}, {Kind::WordCount, "WordCount"},
    {Kind::KMeans, "KMeans"},
};
constexpr std::string_view kKindCli[] = {
    "array-access", "branching",      "sort",
    "block-access", "block-sort",     "edit-distance",
    "floyd-warshall", "wordcount",    "kmeans",
};

struct ImplName {
    Impl impl;
    std::string_view name;
};
constexpr ImplName kImpls[] = {
    {Impl::Unprotected, "Unprotected"}, {Impl::Linear, "Linear"},
    {Impl::Oram, "Oram"},               {Impl::Manual, "Manual"},
    {Impl::Framework, "Framework"},     {Impl::ManualCMOV, "ManualCMOV"},
    {Impl::OramHash, "OramHash"},
};
constexpr std::string_view kImplCli[] = {
    "unprotected", "linear", "oram", "manual", "framework", "manual-cmov",
    "oram-hash",
};

using clk = std::chrono::steady_clock;

double elapsed_ms(clk::time_point t0) {
    return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

void keep(uint64_t v) {
    asm volatile("" : : "r"(v) : "memory");
}

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    Xorshift64Star r(seed ^ (a + 1) * 0x9e3779b97f4a7c15ull ^
                     (b + 1) * 0xc2b2ae3d27d4eb4full);
    r.next();
    return r.next();
}

// ---- branching kernels (Fig. 2b style: one cheap, one expensive) ----

inline uint64_t kernel_cheap(uint64_t x) {
    return x * 0x9e3779b97f4a7c15ull + 0x12345;
}

uint64_t kernel_expensive(uint64_t x) {
    for (int r = 0; r < 16; ++r) {
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        x *= 0x2545f4914f6cdd1dull;
    }
    return x;
}

// 16-byte-record linear scan (o_array_read covers only 8-byte words).
SortRecord o_scan_read16(const ElementBuffer<SortRecord>& buf,
                         uint64_t secret_index) {
    SortRecord acc{};
    for (size_t j = 0; j < buf.len(); ++j) {
        const SortRecord v = buf.read(j);
        const Mask m = o_equal(j, secret_index);
        acc.key = o_select(m, v.key, acc.key);
        acc.payload = o_select(m, v.payload, acc.payload);
    }
    return acc;
}

std::string scratch_file(const Scenario& s, const char* name) {
    return (std::filesystem::path(s.workdir) / name).string();
}

void validate_scenario(const Scenario& s) {
    if (!combo_valid(s.kind, s.impl)) {
        throw UsageError(std::string("invalid combination: ") +
                         std::string(kind_name(s.kind)) + " with " +
                         std::string(impl_name(s.impl)));
    }
    if (s.reps < 3) throw UsageError("repetitions must be >= 3");
    switch (s.kind) {
        case Kind::ArrayAccess:
            if (s.n == 0) throw UsageError("array-access needs --n >= 1");
            if (s.record_bytes != 0 && s.record_bytes != 8 &&
                s.record_bytes != 16)
                throw UsageError("--record-bytes must be 8 or 16");
            break;
        case Kind::Branching:
            if (s.bias_permille > 1000)
                throw UsageError("--bias must be in [0,1000]");
            break;
        case Kind::Sort:
        case Kind::EditDistance:
            if (s.n == 0) throw UsageError("scenario needs --n >= 1");
            break;
        case Kind::FloydWarshall:
            if (s.n < 2) throw UsageError("floyd-warshall needs --n >= 2");
            break;
        case Kind::BlockAccess:
        case Kind::BlockSort:
        case Kind::WordCount:
            if (s.blocks == 0) throw UsageError("scenario needs --blocks >= 1");
            break;
        case Kind::KMeans:
            if (s.blocks == 0) throw UsageError("kmeans needs --blocks >= 1");
            if (s.clusters == 0) throw UsageError("kmeans needs --k >= 1");
            if (s.iters == 0) throw UsageError("kmeans needs --iters >= 1");
            break;
    }
}

struct RepOutcome {
    double ms = 0;
    std::optional<uint64_t> aux;
};

}  // namespace

std::string_view kind_name(Kind k) noexcept {
    return kKinds[static_cast<size_t>(k)].name;
}
std::string_view impl_name(Impl i) noexcept {
    return kImpls[static_cast<size_t>(i)].name;
}

bool parse_kind(std::string_view s, Kind& out) noexcept {
    for (size_t i = 0; i < std::size(kKinds); ++i) {
        if (s == kKinds[i].name || s == kKindCli[i]) {
            out = kKinds[i].kind;
            return true;
        }
    }
    return false;
}

bool parse_impl(std::string_view s, Impl& out) noexcept {
    for (size_t i = 0; i < std::size(kImpls); ++i) {
        if (s == kImpls[i].name || s == kImplCli[i]) {
            out = kImpls[i].impl;
            return true;
        }
    }
    return false;
}

bool combo_valid(Kind k, Impl i) noexcept {
    switch (k) {
        case Kind::ArrayAccess:
        case Kind::BlockAccess:
            return i == Impl::Unprotected || i == Impl::Linear ||
                   i == Impl::Oram;
        case Kind::Branching:
        case Kind::Sort:
        case Kind::BlockSort:
        case Kind::EditDistance:
        case Kind::FloydWarshall:
            return i == Impl::Unprotected || i == Impl::Manual;
        case Kind::WordCount:
            return i == Impl::Unprotected || i == Impl::Manual ||
                   i == Impl::Framework;
        case Kind::KMeans:
            return i == Impl::Unprotected || i == Impl::ManualCMOV ||
                   i == Impl::OramHash || i == Impl::Framework;
    }
    return false;
}

namespace {

// ---- per-kind repetition runners ----

RepOutcome rep_array_access(const Scenario& s, uint64_t rep) {
    const uint32_t rb = s.record_bytes == 0 ? 8 : s.record_bytes;
    const uint64_t n = s.n;
    constexpr uint64_t kAccesses = 256;
    Xorshift64Star rng(mix_seed(s.seed, rep, 11));
    std::vector<uint64_t> idx(kAccesses);
    for (auto& v : idx) v = rng.next_below(n);

    double ms = 0;
    if (s.impl == Impl::Unprotected) {
        if (rb == 8) {
            std::vector<word> v(n);
            for (auto& x : v) x = rng.next();
            uint64_t acc = 0;
            const auto t0 = clk::now();
            for (uint64_t a = 0; a < kAccesses; ++a) acc ^= v[idx[a]];
            ms = elapsed_ms(t0);
            keep(acc);
        } else {
            std::vector<SortRecord> v(n);
            for (auto& x : v) x = {rng.next(), rng.next()};
            uint64_t acc = 0;
            const auto t0 = clk::now();
            for (uint64_t a = 0; a < kAccesses; ++a) acc ^= v[idx[a]].key;
            ms = elapsed_ms(t0);
            keep(acc);
        }
    } else if (s.impl == Impl::Linear) {
        if (rb == 8) {
            ElementBuffer<word> buf(nullptr, n);
            for (auto& x : buf.raw()) x = rng.next();
            uint64_t acc = 0;
            const auto t0 = clk::now();
            for (uint64_t a = 0; a < kAccesses; ++a)
                acc ^= o_array_read(buf, idx[a]);
            ms = elapsed_ms(t0);
            keep(acc);
        } else {
            ElementBuffer<SortRecord> buf(nullptr, n);
            for (auto& x : buf.raw()) x = {rng.next(), rng.next()};
            uint64_t acc = 0;
            const auto t0 = clk::now();
            for (uint64_t a = 0; a < kAccesses; ++a)
                acc ^= o_scan_read16(buf, idx[a]).key;
            ms = elapsed_ms(t0);
            keep(acc);
        }
    } else {  // Oram
        PathOram oram(OramConfig{.capacity = n,
                                 .block_bytes = rb,
                                 .rng_seed = mix_seed(s.seed, 5, 17)},
                      nullptr);
        std::vector<uint8_t> out(rb);
        const auto t0 = clk::now();
        for (uint64_t a = 0; a < kAccesses; ++a) {
            oram.read(idx[a], std::span<uint8_t>(out));
        }
        ms = elapsed_ms(t0);
        keep(out[0]);
    }
    return {ms / static_cast<double>(kAccesses), std::nullopt};
}

RepOutcome rep_branching(const Scenario& s, uint64_t rep) {
    const uint64_t n = s.n == 0 ? 1'000'000 : s.n;
    Xorshift64Star rng(mix_seed(s.seed, rep, 23));
    std::vector<uint8_t> bits(n);
    for (auto& b : bits)
        b = static_cast<uint8_t>(rng.next_below(1000) < s.bias_permille);

    uint64_t acc = rng.next();
    double ms = 0;
    if (s.impl == Impl::Unprotected) {
        const auto t0 = clk::now();
        for (uint64_t i = 0; i < n; ++i) {
            if (bits[i]) {
                acc = kernel_expensive(acc);
            } else {
                acc = kernel_cheap(acc);
            }
        }
        ms = elapsed_ms(t0);
    } else {
        const auto t0 = clk::now();
        for (uint64_t i = 0; i < n; ++i) {
            const uint64_t e = kernel_expensive(acc);
            const uint64_t c = kernel_cheap(acc);
            acc = o_select(o_equal(bits[i], 1), e, c);
        }
        ms = elapsed_ms(t0);
    }
    keep(acc);
    return {ms, std::nullopt};
}

RepOutcome rep_sort(const Scenario& s, uint64_t rep) {
    Xorshift64Star rng(mix_seed(s.seed, rep, 31));
    if (s.impl == Impl::Unprotected) {
        std::vector<SortRecord> v(s.n);
        for (auto& r : v) r = {rng.next(), rng.next()};
        const auto t0 = clk::now();
        unprotected_sort(v);
        const double ms = elapsed_ms(t0);
        keep(v[0].key);
        return {ms, std::nullopt};
    }
    ElementBuffer<SortRecord> buf(nullptr, s.n);
    for (auto& r : buf.raw()) r = {rng.next() >> 1, rng.next()};
    const auto t0 = clk::now();
    const uint64_t comparators = bitonic_sort(buf);
    const double ms = elapsed_ms(t0);
    keep(buf.raw()[0].key);
    return {ms, comparators};
}

RepOutcome rep_block_access(const Scenario& s, uint64_t rep,
                            const BlockStore& store, BlockOram* oram) {
    Xorshift64Star rng(mix_seed(s.seed, rep, 37));
    const uint64_t accesses = s.impl == Impl::Linear ? 4 : 64;
    std::vector<uint64_t> idx(accesses);
    for (auto& v : idx) v = rng.next_below(s.blocks);

    uint64_t acc = 0;
    const auto t0 = clk::now();
    for (uint64_t a = 0; a < accesses; ++a) {
        Block b;
        if (s.impl == Impl::Unprotected) {
            b = store.read_block(idx[a]);
        } else if (s.impl == Impl::Linear) {
            b = o_block_access_linear(store, idx[a]);
        } else {
            b = oram->read_block(idx[a]);
        }
        acc ^= b.records[0].value;
    }
    const double ms = elapsed_ms(t0);
    keep(acc);
    return {ms / static_cast<double>(accesses), std::nullopt};
}

RepOutcome rep_block_sort(const Scenario& s, uint64_t rep) {
    const std::string path = scratch_file(s, "bench_blocksort.bin");
    gen_kv_store(path, s.blocks, mix_seed(s.seed, rep, 41));
    BlockStore store = BlockStore::open_existing(path, nullptr);
    if (s.impl == Impl::Unprotected) {
        const auto t0 = clk::now();
        unprotected_block_sort(store);
        return {elapsed_ms(t0), std::nullopt};
    }
    const auto t0 = clk::now();
    const BlockSortStats st = block_bitonic_sort(store);
    return {elapsed_ms(t0), st.merge_splits};
}

RepOutcome rep_edit_distance(const Scenario& s, uint64_t rep) {
    Xorshift64Star rng(mix_seed(s.seed, rep, 43));
    std::vector<uint8_t> a(s.n), b(s.n);
    for (auto& c : a) c = static_cast<uint8_t>('a' + rng.next_below(26));
    for (auto& c : b) c = static_cast<uint8_t>('a' + rng.next_below(26));

    if (s.impl == Impl::Unprotected) {
        const auto t0 = clk::now();
        const uint64_t d = unprotected_edit_distance(a, b);
        const double ms = elapsed_ms(t0);
        keep(d);
        return {ms, std::nullopt};
    }
    ElementBuffer<uint8_t> ba(nullptr, std::span<const uint8_t>(a));
    ElementBuffer<uint8_t> bb(nullptr, std::span<const uint8_t>(b));
    const auto t0 = clk::now();
    const word d = o_edit_distance(ba, bb);
    const double ms = elapsed_ms(t0);
    keep(d);
    return {ms, std::nullopt};
}

std::vector<word> random_graph(size_t n, Xorshift64Star& rng) {
    std::vector<word> m(n * n, kInfDistance);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) {
                m[i * n + j] = 0;
            } else if (rng.next_below(100) < 30) {
                m[i * n + j] = 1 + rng.next_below(100);
            }
        }
    }
    return m;
}

RepOutcome rep_floyd_warshall(const Scenario& s, uint64_t rep) {
    Xorshift64Star rng(mix_seed(s.seed, rep, 47));
    const std::vector<word> init = random_graph(s.n, rng);

    if (s.impl == Impl::Unprotected) {
        const auto t0 = clk::now();
        std::vector<word> m = init;
        unprotected_floyd_warshall(m, s.n);
        const double ms = elapsed_ms(t0);
        keep(m[s.n - 1]);
        return {ms, std::nullopt};
    }
    const auto t0 = clk::now();
    DistMatrix m(nullptr, s.n, init);
    o_floyd_warshall(m);
    const double ms = elapsed_ms(t0);
    keep(m.entries.raw()[s.n - 1]);
    return {ms, std::nullopt};
}

RepOutcome rep_wordcount(const Scenario& s, const BlockStore& input) {
    const std::string out = scratch_file(s, "bench_wc_out.bin");
    WordCountImpl impl = WordCountImpl::Unprotected;
    if (s.impl == Impl::Manual) impl = WordCountImpl::Manual;
    if (s.impl == Impl::Framework) impl = WordCountImpl::Framework;
    const auto t0 = clk::now();
    const WordCountStats st = wordcount(input, out, impl);
    const double ms = elapsed_ms(t0);
    return {ms, impl == WordCountImpl::Unprotected
                    ? std::optional<uint64_t>{}
                    : std::optional<uint64_t>{st.merge_splits}};
}

RepOutcome rep_kmeans(const Scenario& s, const BlockStore& input) {
    KMeansImpl impl = KMeansImpl::Unprotected;
    if (s.impl == Impl::ManualCMOV) impl = KMeansImpl::ManualCMOV;
    if (s.impl == Impl::OramHash) impl = KMeansImpl::OramHash;
    if (s.impl == Impl::Framework) impl = KMeansImpl::Framework;
    const auto t0 = clk::now();
    const KMeansResult r = kmeans(input, s.clusters, s.iters, impl);
    const double ms = elapsed_ms(t0);
    keep(static_cast<uint64_t>(r.means[0].x));
    return {ms, impl == KMeansImpl::OramHash
                    ? std::optional<uint64_t>{r.miss_sequence.size()}
                    : std::optional<uint64_t>{}};
}

}  // namespace

Measurement run_scenario(const Scenario& s) {
    validate_scenario(s);
    RecordingGuard off(false);
    std::filesystem::create_directories(s.workdir);

    // Shared per-scenario setup, excluded from the timed region.
    std::optional<BlockStore> store;
    std::optional<BlockOram> block_oram;
    uint64_t kmeans_points = 0;
    switch (s.kind) {
        case Kind::BlockAccess: {
            const std::string path = scratch_file(s, "bench_blockaccess.bin");
            gen_kv_store(path, s.blocks, mix_seed(s.seed, 1, 2));
            store.emplace(BlockStore::open_existing(path, nullptr));
            if (s.impl == Impl::Oram) {
                block_oram.emplace(
                    BlockOram::from_store(*store, mix_seed(s.seed, 3, 4), nullptr));
            }
            break;
        }
        case Kind::WordCount: {
            const std::string path = scratch_file(s, "bench_wc_in.bin");
            gen_wordcount_store(path, s.blocks, mix_seed(s.seed, 1, 2));
            store.emplace(BlockStore::open_existing(path, nullptr));
            break;
        }
        case Kind::KMeans: {
            const std::string path = scratch_file(s, "bench_km_in.bin");
            kmeans_points = s.n == 0 ? 85 * s.blocks : s.n;
            gen_points_store(path, s.blocks, kmeans_points, s.clusters,
                             mix_seed(s.seed, 1, 2));
            store.emplace(BlockStore::open_existing(path, nullptr));
            break;
        }
        default:
            break;
    }

    auto one_rep = [&](uint64_t rep) -> RepOutcome {
        switch (s.kind) {
            case Kind::ArrayAccess: return rep_array_access(s, rep);
            case Kind::Branching: return rep_branching(s, rep);
            case Kind::Sort: return rep_sort(s, rep);
            case Kind::BlockAccess:
                return rep_block_access(s, rep, *store,
                                        block_oram ? &*block_oram : nullptr);
            case Kind::BlockSort: return rep_block_sort(s, rep);
            case Kind::EditDistance: return rep_edit_distance(s, rep);
            case Kind::FloydWarshall: return rep_floyd_warshall(s, rep);
            case Kind::WordCount: return rep_wordcount(s, *store);
            case Kind::KMeans: return rep_kmeans(s, *store);
        }
        throw std::logic_error("unreachable scenario kind");
    };

    one_rep(~uint64_t{0});  // warm-up

    std::vector<double> times;
    times.reserve(s.reps);
    std::optional<uint64_t> aux;
    for (uint32_t r = 0; r < s.reps; ++r) {
        const RepOutcome out = one_rep(r);
        times.push_back(out.ms);
        aux = out.aux;
    }

    Measurement m;
    m.scenario = s;
    switch (s.kind) {
        case Kind::BlockAccess:
        case Kind::BlockSort:
        case Kind::WordCount:
            m.csv_n = s.blocks;
            m.csv_record_bytes = kBlockBytes;
            break;
        case Kind::KMeans:
            m.csv_n = kmeans_points;
            m.csv_record_bytes = sizeof(Point);
            break;
        case Kind::Sort:
            m.csv_n = s.n;
            m.csv_record_bytes = sizeof(SortRecord);
            break;
        case Kind::ArrayAccess:
            m.csv_n = s.n;
            m.csv_record_bytes = s.record_bytes == 0 ? 8 : s.record_bytes;
            break;
        case Kind::Branching:
            m.csv_n = s.n == 0 ? 1'000'000 : s.n;
            m.csv_record_bytes = 8;
            break;
        default:
            m.csv_n = s.n;
            m.csv_record_bytes = 8;
            break;
    }
    m.median_ms = median(times);
    m.min_ms = *std::min_element(times.begin(), times.end());
    m.max_ms = *std::max_element(times.begin(), times.end());
    m.aux = aux;
    return m;
}

void emit_csv(std::span<const Measurement> ms, std::ostream& os) {
    os << "kind,impl,n,record_bytes,reps,median_ms,min_ms,max_ms,aux_count\n";
    char buf[64];
    for (const Measurement& m : ms) {
        os << kind_name(m.scenario.kind) << ',' << impl_name(m.scenario.impl)
           << ',' << m.csv_n << ',' << m.csv_record_bytes << ','
           << m.scenario.reps << ',';
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", m.median_ms, m.min_ms,
                      m.max_ms);
        os << buf << ',';
        if (m.aux) os << *m.aux;
        os << '\n';
    }
}

void emit_csv_file(std::span<const Measurement> ms, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("emit_csv: cannot open " + path);
    emit_csv(ms, os);
    os.flush();
    if (!os) throw std::runtime_error("emit_csv: write failed for " + path);
}

// ---- obliviousness checker ----

namespace {

std::string event_str(const AccessEvent& e) {
    std::string s(e.kind == AccessKind::Read ? "R " : "W ");
    s += std::to_string(e.region) + " " + std::to_string(e.offset) + " " +
         std::to_string(e.width);
    return s;
}

std::string check_dir(const std::string& workdir) {
    std::filesystem::path p =
        workdir.empty()
            ? std::filesystem::temp_directory_path() / "obl_check"
            : std::filesystem::path(workdir);
    std::filesystem::create_directories(p);
    return p.string();
}

void expect_shape(std::span<const uint64_t> shape, size_t lo, size_t hi,
                  const char* what) {
    if (shape.size() < lo || shape.size() > hi) {
        throw UsageError(std::string("--shape for this kind needs ") + what);
    }
    for (uint64_t v : shape) {
        if (v == 0) throw UsageError("--shape values must be positive");
    }
}

}  // namespace

CheckReport check_pairs(
    std::string kind, std::vector<uint64_t> shape, uint32_t pairs,
    uint64_t seed,
    const std::function<AccessTrace(uint64_t data_seed)>& runner) {
    CheckReport rep;
    rep.kind = std::move(kind);
    rep.shape = std::move(shape);
    rep.pairs = pairs;
    for (uint32_t p = 0; p < pairs; ++p) {
        AccessTrace a = runner(mix_seed(seed, p, 0));
        AccessTrace b = runner(mix_seed(seed, p, 1));
        PairResult pr;
        pr.pair = p;
        pr.len_a = a.size();
        pr.len_b = b.size();
        const auto div = first_divergence(a, b);
        pr.pass = !div.has_value();
        if (pr.pass) {
            ++rep.passed;
        } else {
            pr.divergence = *div;
            if (pr.divergence < a.size() && pr.divergence < b.size()) {
                pr.detail = "event " + std::to_string(pr.divergence) + ": '" +
                            event_str(a[pr.divergence]) + "' vs '" +
                            event_str(b[pr.divergence]) + "'";
            } else {
                pr.detail = "trace lengths differ (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")";
            }
            if (!rep.has_failure) {
                rep.has_failure = true;
                rep.fail_a = a;
                rep.fail_b = b;
            }
        }
        if (p == 0) rep.sample = std::move(a);
        rep.results.push_back(std::move(pr));
    }
    return rep;
}

CheckReport check_oblivious(const std::string& kind,
                            std::span<const uint64_t> shape, uint32_t pairs,
                            uint64_t seed, const std::string& workdir) {
    if (pairs == 0) throw UsageError("--pairs must be >= 1");
    std::vector<uint64_t> shape_v(shape.begin(), shape.end());

    if (kind == "select") {
        expect_shape(shape, 1, 1, "[n]");
        const uint64_t n = shape[0];
        return check_pairs(kind, shape_v, pairs, seed, [n](uint64_t ds) {
            RecordingGuard on(true);
            Xorshift64Star rng(ds);
            AccessTrace t;
            ElementBuffer<word> buf(&t, n);
            for (auto& x : buf.raw()) x = rng.next();
            for (uint64_t i = 0; i < n; ++i) {
                const word x = buf.read(i);
                const word y = buf.read((i + 1) % n);
                buf.write(i, o_select(o_greater(x, y), x, y));
            }
            return t;
        });
    }
    if (kind == "array") {
        expect_shape(shape, 1, 1, "[n]");
        const uint64_t n = shape[0];
        return check_pairs(kind, shape_v, pairs, seed, [n](uint64_t ds) {
            RecordingGuard on(true);
            Xorshift64Star rng(ds);
            AccessTrace t;
            ElementBuffer<word> buf(&t, n);
            for (auto& x : buf.raw()) x = rng.next();
            for (int i = 0; i < 16; ++i) {
                keep(o_array_read(buf, rng.next_below(n + 2)));
                o_array_write(buf, rng.next_below(n + 2), rng.next());
            }
            return t;
        });
    }
    if (kind == "block-access") {
        expect_shape(shape, 1, 1, "[blocks]");
        const uint64_t blocks = shape[0];
        const std::string dir = check_dir(workdir);
        return check_pairs(kind, shape_v, pairs, seed, [blocks, dir](uint64_t ds) {
            const std::string path = dir + "/chk_blockaccess.bin";
            gen_kv_store(path, blocks, ds);
            RecordingGuard on(true);
            Xorshift64Star rng(ds ^ 0x55);
            AccessTrace t;
            BlockStore store = BlockStore::open_existing(path, &t);
            for (int i = 0; i < 4; ++i) {
                const Block b =
                    o_block_access_linear(store, rng.next_below(blocks + 1));
                keep(b.records[0].value);
            }
            return t;
        });
    }
    if (kind == "sort") {
        expect_shape(shape, 1, 1, "[n]");
        const uint64_t n = shape[0];
        return check_pairs(kind, shape_v, pairs, seed, [n](uint64_t ds) {
            RecordingGuard on(true);
            Xorshift64Star rng(ds);
            AccessTrace t;
            ElementBuffer<SortRecord> buf(&t, n);
            for (auto& r : buf.raw()) r = {rng.next() >> 1, rng.next()};
            bitonic_sort(buf);
            return t;
        });
    }
    if (kind == "block-sort") {
        expect_shape(shape, 1, 1, "[blocks]");
        const uint64_t blocks = shape[0];
        const std::string dir = check_dir(workdir);
        return check_pairs(kind, shape_v, pairs, seed, [blocks, dir](uint64_t ds) {
            const std::string path = dir + "/chk_blocksort.bin";
            gen_kv_store(path, blocks, ds);
            RecordingGuard on(true);
            AccessTrace t;
            BlockStore store = BlockStore::open_existing(path, &t);
            block_bitonic_sort(store);
            return t;
        });
    }
    if (kind == "edit-distance") {
        expect_shape(shape, 1, 2, "[len_a] or [len_a len_b]");
        const uint64_t la = shape[0];
        const uint64_t lb = shape.size() > 1 ? shape[1] : shape[0];
        return check_pairs(kind, shape_v, pairs, seed, [la, lb](uint64_t ds) {
            RecordingGuard on(true);
            Xorshift64Star rng(ds);
            AccessTrace t;
            ElementBuffer<uint8_t> a(&t, la);
            ElementBuffer<uint8_t> b(&t, lb);
            for (auto& c : a.raw()) c = static_cast<uint8_t>('a' + rng.next_below(26));
            for (auto& c : b.raw()) c = static_cast<uint8_t>('a' + rng.next_below(26));
            keep(o_edit_distance(a, b));
            return t;
        });
    }
    if (kind == "floyd-warshall") {
        expect_shape(shape, 1, 1, "[n]");
        const uint64_t n = shape[0];
        return check_pairs(kind, shape_v, pairs, seed, [n](uint64_t ds) {
            RecordingGuard on(true);
            Xorshift64Star rng(ds);
            std::vector<word> init(n * n);
            {
                RecordingGuard off(false);
                init = random_graph(n, rng);
            }
            AccessTrace t;
            DistMatrix m(&t, n, init);
            o_floyd_warshall(m);
            return t;
        });
    }
    if (kind == "wordcount" || kind == "wordcount-framework") {
        expect_shape(shape, 1, 1, "[blocks]");
        const uint64_t blocks = shape[0];
        const WordCountImpl impl = kind == "wordcount"
                                        ? WordCountImpl::Manual
                                        : WordCountImpl::Framework;
        const std::string dir = check_dir(workdir);
        return check_pairs(kind, shape_v, pairs, seed,
                           [blocks, impl, dir](uint64_t ds) {
            const std::string in_path = dir + "/chk_wc_in.bin";
            gen_wordcount_store(in_path, blocks, ds);
            RecordingGuard on(true);
            AccessTrace t;
            BlockStore input = BlockStore::open_existing(in_path, &t);
            wordcount(input, dir + "/chk_wc_out.bin", impl);
            return t;
        });
    }
    if (kind == "kmeans-manual") {
        expect_shape(shape, 1, 3, "[points] or [points k] or [points k iters]");
        const uint64_t points = shape[0];
        const uint64_t k = shape.size() > 1 ? shape[1] : 5;
        const uint64_t iters = shape.size() > 2 ? shape[2] : 2;
        const uint64_t blocks = (points + 84) / 85;
        const std::string dir = check_dir(workdir);
        return check_pairs(kind, shape_v, pairs, seed,
                           [points, k, iters, blocks, dir](uint64_t ds) {
            const std::string path = dir + "/chk_km_in.bin";
            gen_points_store(path, blocks, points, std::max<uint64_t>(k, 2), ds);
            RecordingGuard on(true);
            AccessTrace t;
            BlockStore input = BlockStore::open_existing(path, &t);
            kmeans(input, k, iters, KMeansImpl::ManualCMOV);
            return t;
        });
    }
    if (kind == "kmeans-oram-hash") {
        expect_shape(shape, 1, 3, "[points] or [points k] or [points k iters]");
        const uint64_t points = shape[0];
        const uint64_t k = shape.size() > 1 ? shape[1] : 5;
        const uint64_t iters = shape.size() > 2 ? shape[2] : 2;
        const uint64_t blocks = (points + 84) / 85;
        const std::string dir = check_dir(workdir);

        CheckReport rep;
        rep.kind = kind;
        rep.shape = shape_v;
        rep.pairs = pairs;
        rep.refused = true;

        RecordingGuard off(false);
        const std::string path = dir + "/chk_kmoh_in.bin";
        gen_points_store(path, blocks, points, std::max<uint64_t>(k, 2),
                         mix_seed(seed, 0, 0));
        BlockStore input = BlockStore::open_existing(path, nullptr);
        const KMeansResult r = kmeans(input, k, iters, KMeansImpl::OramHash);
        std::vector<uint64_t> distinct = r.miss_sequence;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()),
                       distinct.end());
        const double h = shannon_entropy(r.miss_sequence);
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "%zu misses over %zu distinct blocks, entropy %.4f "
                      "bits/symbol",
                      r.miss_sequence.size(), distinct.size(), h);
        rep.message =
            "KMeans-OramHash is not trace-invariant: which centroid "
            "aggregates a block touches depends on the data, so no "
            "invariance claim is made. Miss-sequence report: " +
            std::string(buf);
        return rep;
    }

    throw UsageError("unknown check kind: " + kind);
}

// ---- statistics ----

double median(std::vector<double> xs) {
    if (xs.empty()) return 0;
    std::sort(xs.begin(), xs.end());
    const size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

double chi_square_stat(std::span<const uint64_t> counts, double expected) {
    double stat = 0;
    for (uint64_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

double chi_square_critical_999(uint64_t dof) {
    const double v = static_cast<double>(dof);
    const double z = 3.090232;  // upper 0.001 quantile of N(0,1)
    const double a = 2.0 / (9.0 * v);
    const double t = 1.0 - a + z * std::sqrt(a);
    return v * t * t * t;
}

double shannon_entropy(std::span<const uint64_t> symbols) {
    if (symbols.empty()) return 0;
    std::unordered_map<uint64_t, uint64_t> freq;
    for (uint64_t s : symbols) ++freq[s];
    const double n = static_cast<double>(symbols.size());
    double h = 0;
    for (const auto& [_, c] : freq) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace obl::bench
