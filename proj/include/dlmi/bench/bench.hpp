#pragma once

// Scenario matrix: the dynamized index and the static baselines evaluated at
// growing database sizes under every (QF, TR) scenario.

#include "dlmi/baseline/lifecycle.hpp"
#include "dlmi/core/synthetic.hpp"
#include "dlmi/costmodel/cost_model.hpp"
#include "dlmi/dynamize/policy.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dlmi {

struct BenchConfig {
    std::vector<CostScenario> scenarios = {{100.0, 0.9}, {100.0, 0.5}, {1.0, 0.9}, {1.0, 0.5}};
    /// Database sizes to evaluate, ascending.
    std::vector<std::size_t> checkpoints;
    std::size_t k = 30;
    std::size_t bucket_size = 1000;
    IndexOptions index;
    PolicyConfig policy;

    bool run_dynamized = true;
    bool run_none = true;
    bool run_naive = true;
    /// Naive rebuild intervals. Empty: one interval per scenario, tuned on
    /// the reference deterioration curve.
    std::vector<std::size_t> naive_intervals;
    /// Database size the intervals are tuned at (0 = first checkpoint).
    std::size_t ri_reference = 0;
    double ri_min = 100.0;
    std::size_t ri_per_decade = 10;
    /// Probe spacing along each baseline stream, as a fraction of its length.
    double probe_fraction = 0.1;
    /// When false every seconds column is written as 0 so output depends
    /// only on the seed.
    bool wall_clock = true;
    std::uint64_t seed = 0;

    void validate(std::size_t dataset_size) const;
};

struct BenchRecord {
    std::string method;
    CostScenario scenario;
    std::size_t checkpoint = 0;
    double sc_proxy = 0.0;
    double sc_seconds = 0.0;
    double bc_proxy = 0.0;
    double bc_seconds = 0.0;
    double ri = 0.0;
    double ac_proxy = 0.0;
    double ac_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct RiTable {
    CostScenario scenario;
    std::size_t reference_size = 0;
    double build_cost = 0.0;
    RiOptimization result;
};

struct BenchResult {
    std::vector<BenchRecord> records;
    std::vector<RiTable> ri_tables;
    std::vector<std::size_t> naive_intervals;
    ActionLog dynamized_log;
    std::size_t dynamized_stalled_sweeps = 0;
};

struct BenchData {
    /// Rows in insertion order, ids 0..n-1.
    Dataset ordered;
    Dataset queries;
};

/// Generates params.n base rows plus `n_queries` held-out query rows and
/// orders the base rows per `mode`.
BenchData synthetic_bench_data(const SyntheticParams& params, std::size_t n_queries, StreamMode mode,
                               std::uint64_t seed);

/// Shuffled insertion order over an existing dataset (no cluster labels, so
/// shift mode is unavailable).
BenchData ordered_bench_data(const Dataset& base, Dataset queries, std::uint64_t seed);

/// `ordered` is consumed in row order: baseline builds use its first c rows
/// and stream the rest, the dynamized index grows over it from empty.
BenchResult run_scenario_matrix(const Dataset& ordered, const Dataset& queries,
                                const BenchConfig& config);

/// current_sc + total structural cost / total_queries. Throws InvalidInput
/// if total_queries <= 0.
double dynamized_amortized_cost(const ActionLog& log, double total_queries, double current_sc,
                                bool seconds = false);

/// Columns: method, QF, TR, checkpoint_size, SC_proxy, SC_seconds,
/// BC_cum_proxy, BC_cum_seconds, RI, AC_proxy, AC_seconds, seed.
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);

/// Columns: QF, TR, reference_size, RI, mean_SC, build_share, AC.
void write_ri_csv(std::ostream& out, const std::vector<RiTable>& tables);

/// Parses the output of write_bench_csv.
std::vector<BenchRecord> read_bench_csv(std::istream& in);

}  // namespace dlmi
