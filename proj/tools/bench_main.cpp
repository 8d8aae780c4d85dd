#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "obl/apps.hpp"
#include "obl/bench.hpp"
#include "obl/trace.hpp"

namespace {

using namespace obl;
using namespace obl::bench;

int do_run(const Scenario& s, const std::string& csv_path) {
    const Measurement m = run_scenario(s);
    if (csv_path.empty()) {
        emit_csv(std::span<const Measurement>(&m, 1), std::cout);
    } else {
        emit_csv_file(std::span<const Measurement>(&m, 1), csv_path);
        std::printf("%s,%s: median %.6f ms (min %.6f, max %.6f) -> %s\n",
                    std::string(kind_name(s.kind)).c_str(),
                    std::string(impl_name(s.impl)).c_str(), m.median_ms,
                    m.min_ms, m.max_ms, csv_path.c_str());
    }
    return 0;
}

int do_check(const std::string& kind, const std::vector<uint64_t>& shape,
             uint32_t pairs, uint64_t seed, const std::string& dump_path,
             const std::string& workdir) {
    const CheckReport rep = check_oblivious(kind, shape, pairs, seed, workdir);
    if (rep.refused) {
        std::printf("refused: %s\n", rep.message.c_str());
        return 2;
    }
    for (const PairResult& pr : rep.results) {
        if (pr.pass) {
            std::printf("pair %u: ok (%zu events)\n", pr.pair, pr.len_a);
        } else {
            std::printf("pair %u: FAIL %s\n", pr.pair, pr.detail.c_str());
        }
    }
    std::printf("%s: %u/%u pairs trace-identical\n", rep.kind.c_str(),
                rep.passed, rep.pairs);
    if (!dump_path.empty()) {
        if (rep.has_failure) {
            dump_trace_file(rep.fail_a, dump_path);
            dump_trace_file(rep.fail_b, dump_path + ".b");
            std::printf("divergent traces dumped to %s and %s.b\n",
                        dump_path.c_str(), dump_path.c_str());
        } else {
            dump_trace_file(rep.sample, dump_path);
            std::printf("sample trace dumped to %s\n", dump_path.c_str());
        }
    }
    return rep.all_passed() ? 0 : 1;
}

int do_gen(const std::string& kind, const std::string& out, uint64_t blocks,
           uint64_t points, uint32_t clusters, uint32_t vocab, uint64_t seed) {
    if (out.empty()) throw UsageError("gen needs --out");
    if (blocks == 0) throw UsageError("gen needs --blocks >= 1");
    if (kind == "kv") {
        gen_kv_store(out, blocks, seed);
    } else if (kind == "wordcount") {
        gen_wordcount_store(out, blocks, seed, vocab);
    } else if (kind == "points") {
        const uint64_t p = points == 0 ? kPointsPerBlock * blocks : points;
        gen_points_store(out, blocks, p, clusters, seed);
    } else {
        throw UsageError("unknown gen kind: " + kind +
                         " (expected kv, wordcount, or points)");
    }
    std::printf("wrote %llu blocks to %s\n",
                static_cast<unsigned long long>(blocks), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"data-oblivious computation benchmark harness"};
    app.require_subcommand(1);

    // run
    Scenario sc;
    std::string kind_str, impl_str, csv_path;
    CLI::App* run = app.add_subcommand("run", "time one scenario");
    run->add_option("--kind", kind_str, "scenario kind")->required();
    run->add_option("--impl", impl_str, "implementation")->required();
    run->add_option("--n", sc.n, "records / iterations / nodes / length");
    run->add_option("--record-bytes", sc.record_bytes, "8 or 16 (array access)");
    run->add_option("--blocks", sc.blocks, "input blocks (block kinds)");
    run->add_option("--k", sc.clusters, "clusters (kmeans)");
    run->add_option("--iters", sc.iters, "iterations (kmeans)");
    run->add_option("--reps", sc.reps, "timed repetitions (>= 3)");
    run->add_option("--seed", sc.seed, "input seed");
    run->add_option("--bias", sc.bias_permille,
                    "branching: P(expensive) in permille");
    run->add_option("--workdir", sc.workdir, "scratch directory");
    run->add_option("--csv", csv_path, "output CSV path (default: stdout)");

    // check-oblivious
    std::string chk_kind, dump_path, chk_workdir;
    std::vector<uint64_t> shape;
    uint32_t pairs = 20;
    uint64_t chk_seed = 1;
    CLI::App* chk = app.add_subcommand("check-oblivious",
                                       "compare traces over input pairs");
    chk->add_option("--kind", chk_kind,
                    "select | array | block-access | sort | block-sort | "
                    "edit-distance | floyd-warshall | wordcount | "
                    "wordcount-framework | kmeans-manual | kmeans-oram-hash")
        ->required();
    chk->add_option("--shape", shape, "shape arguments (sizes)")
        ->required()
        ->expected(1, 3);
    chk->add_option("--pairs", pairs, "input pairs to compare");
    chk->add_option("--seed", chk_seed, "input seed");
    chk->add_option("--dump", dump_path, "trace dump path");
    chk->add_option("--workdir", chk_workdir, "scratch directory");

    // gen
    std::string gen_kind, gen_out;
    uint64_t gen_blocks = 0, gen_points = 0, gen_seed = 1;
    uint32_t gen_clusters = 5, gen_vocab = 500;
    CLI::App* gen = app.add_subcommand("gen", "materialize input block files");
    gen->add_option("--kind", gen_kind, "kv | wordcount | points")->required();
    gen->add_option("--out", gen_out, "output store path")->required();
    gen->add_option("--blocks", gen_blocks, "blocks to write")->required();
    gen->add_option("--points", gen_points, "points (points kind)");
    gen->add_option("--k", gen_clusters, "cluster centers (points kind)");
    gen->add_option("--vocab", gen_vocab, "vocabulary size (wordcount kind)");
    gen->add_option("--seed", gen_seed, "input seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            if (!parse_kind(kind_str, sc.kind))
                throw UsageError("unknown kind: " + kind_str);
            if (!parse_impl(impl_str, sc.impl))
                throw UsageError("unknown impl: " + impl_str);
            return do_run(sc, csv_path);
        }
        if (chk->parsed()) {
            return do_check(chk_kind, shape, pairs, chk_seed, dump_path,
                            chk_workdir);
        }
        if (gen->parsed()) {
            return do_gen(gen_kind, gen_out, gen_blocks, gen_points,
                          gen_clusters, gen_vocab, gen_seed);
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
