#pragma once

// JSON run configuration for the bench and optimize-ri commands. Every key
// is optional; unknown keys are rejected. See README for the schema.

#include "dlmi/bench/bench.hpp"

#include <filesystem>
#include <string>

namespace dlmi {

struct DataConfig {
    /// "synthetic" or "fvecs".
    std::string source = "synthetic";
    SyntheticParams synthetic{50000, 32, 20, 1, 10.0, 1.0};
    std::size_t n_queries = 200;
    std::string fvecs_path;
    std::string queries_path;
};

struct RunConfig {
    DataConfig data;
    StreamMode stream = StreamMode::shuffle;
    BenchConfig bench;
    std::string output_dir = "bench_out";
};

/// Defaults: bucket 1000, underflow 5, max average occupancy 1000,
/// depth 2, k 30, QF in {1, 100}, TR in {0.5, 0.9}, MLP hidden width 128,
/// checkpoints every 5K from 5K to 45K.
RunConfig default_run_config();

/// Throws InvalidInput naming the offending key.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Full serialization: parse_run_config(to_json(c)) == c in effect.
std::string to_json(const RunConfig& config);

/// Materializes the configured data source in insertion order.
BenchData load_bench_data(const RunConfig& config);

}  // namespace dlmi
