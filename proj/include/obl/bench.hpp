#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "obl/trace.hpp"

namespace obl::bench {

enum class Kind {
    ArrayAccess,
    Branching,
    Sort,
    BlockAccess,
    BlockSort,
    EditDistance,
    FloydWarshall,
    WordCount,
    KMeans,
};

enum class Impl {
    Unprotected,
    Linear,
    Oram,
    Manual,
    Framework,
    ManualCMOV,
    OramHash,
};

std::string_view kind_name(Kind k) noexcept;
std::string_view impl_name(Impl i) noexcept;
bool parse_kind(std::string_view s, Kind& out) noexcept;
bool parse_impl(std::string_view s, Impl& out) noexcept;
bool combo_valid(Kind k, Impl i) noexcept;

// Scenario/measurement errors that are the caller's fault (bad combination,
// bad sizes); the CLI maps these to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Scenario {
    Kind kind = Kind::Sort;
    Impl impl = Impl::Manual;
    uint64_t n = 0;             // records / iterations / nodes / string length
    uint32_t record_bytes = 0;  // ArrayAccess: 8 or 16; 0 picks the default
    uint64_t blocks = 0;        // block-store kinds
    uint32_t clusters = 5;      // KMeans
    uint32_t iters = 10;        // KMeans
    uint32_t reps = 5;
    uint64_t seed = 1;
    uint32_t bias_permille = 500;  // Branching: P(expensive kernel) * 1000
    std::string workdir = ".";
};

struct Measurement {
    Scenario scenario;
    uint64_t csv_n = 0;          // principal size echoed to the CSV
    uint32_t csv_record_bytes = 0;
    double median_ms = 0;
    double min_ms = 0;
    double max_ms = 0;
    std::optional<uint64_t> aux;  // comparator / merge-split / miss counts
};

// Runs warm-up plus s.reps timed repetitions with recording disabled.
// Deterministic inputs from s.seed; scratch files land under s.workdir.
Measurement run_scenario(const Scenario& s);

// header: kind,impl,n,record_bytes,reps,median_ms,min_ms,max_ms,aux_count
void emit_csv(std::span<const Measurement> ms, std::ostream& os);
void emit_csv_file(std::span<const Measurement> ms, const std::string& path);

// ---- obliviousness checker ----

struct PairResult {
    uint32_t pair = 0;
    bool pass = false;
    size_t divergence = 0;   // event index, valid when !pass
    size_t len_a = 0;
    size_t len_b = 0;
    std::string detail;      // formatted divergence description
};

struct CheckReport {
    std::string kind;
    std::vector<uint64_t> shape;
    uint32_t pairs = 0;
    uint32_t passed = 0;
    bool refused = false;        // non-invariant kind: no claim made
    std::string message;         // refusal text / aux report
    std::vector<PairResult> results;
    AccessTrace sample;          // pair 0, first run (for --dump)
    AccessTrace fail_a, fail_b;  // first failing pair, both runs
    bool has_failure = false;

    bool all_passed() const noexcept {
        return !refused && pairs > 0 && passed == pairs;
    }
};

// Generic pair checker: runs the runner twice per pair on shape-identical
// inputs derived from (seed, pair index, side) and compares raw traces.
CheckReport check_pairs(std::string kind, std::vector<uint64_t> shape,
                        uint32_t pairs, uint64_t seed,
                        const std::function<AccessTrace(uint64_t data_seed)>& runner);

// Built-in runners by kind name: select, array, block-access, sort,
// block-sort, edit-distance, floyd-warshall, wordcount, wordcount-framework,
// kmeans-manual.  kmeans-oram-hash refuses and reports miss-sequence
// entropy instead.  workdir holds the scratch stores (empty: a temp dir).
CheckReport check_oblivious(const std::string& kind,
                            std::span<const uint64_t> shape, uint32_t pairs,
                            uint64_t seed, const std::string& workdir = "");

// ---- small statistics helpers ----

double median(std::vector<double> xs);
double chi_square_stat(std::span<const uint64_t> counts, double expected);
// Upper 0.001 quantile of chi-square with dof degrees of freedom
// (Wilson-Hilferty approximation, z = 3.090232).
double chi_square_critical_999(uint64_t dof);
// Shannon entropy in bits/symbol of the value distribution.
double shannon_entropy(std::span<const uint64_t> symbols);

}  // namespace obl::bench
