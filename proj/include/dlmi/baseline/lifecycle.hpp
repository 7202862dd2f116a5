#pragma once

// Static baselines: No rebuild (one build, plain inserts afterwards) and
// Naive rebuild (full rebuild every `rebuild_interval` inserts).

#include "dlmi/costmodel/cost_model.hpp"
#include "dlmi/index/index.hpp"

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dlmi {

enum class RebuildKind : std::uint8_t { none, naive };

struct RebuildPolicy {
    RebuildKind kind = RebuildKind::none;
    std::size_t rebuild_interval = 0;

    static RebuildPolicy none() { return {RebuildKind::none, 0}; }
    static RebuildPolicy naive(std::size_t ri) { return {RebuildKind::naive, ri}; }

    /// Throws InvalidInput for a naive policy with rebuild_interval < 1.
    void validate() const;
    std::string label() const;
};

struct BuildParams {
    std::size_t target_bucket_size = 1000;
    IndexOptions options;
};

/// Measures the index at a probe point. `inserts` counts stream objects
/// inserted so far.
using ProbeFn = std::function<RecallProfile(const Index& index, std::size_t inserts)>;

struct LifecycleSnapshot {
    std::size_t inserts = 0;
    std::size_t db_size = 0;
    std::size_t builds = 0;
    /// Inserts since the most recent build.
    std::size_t since_build = 0;
    Cost cumulative_build;
    std::optional<RecallProfile> profile;
};

struct LifecycleReport {
    /// Stream positions (1-based insert counts) that triggered a rebuild.
    std::vector<std::size_t> rebuilds_at;
    std::size_t builds = 0;
    Cost initial_build;
    Cost cumulative_build;
    std::vector<LifecycleSnapshot> snapshots;
    Index final_index{1};
};

/// Builds from `initial` and feeds `stream` one object at a time. Probe
/// points are insert counts in [0, stream.size()], ascending. Throws
/// InvalidInput for an empty initial set, ids shared between the two sets,
/// or bad probe points.
LifecycleReport run_lifecycle(const Dataset& initial, const Dataset& stream,
                              const RebuildPolicy& policy, std::span<const std::size_t> probe_points,
                              const BuildParams& params, const ProbeFn& probe = {});

/// Probe points at every `fraction` of a stream of length n, including 0 and n.
std::vector<std::size_t> fractional_probe_points(std::size_t n, double fraction = 0.1);

/// Probe that computes exact ground truth over the index store and profiles
/// the fixed query set against it.
ProbeFn bruteforce_probe(const Dataset& queries, std::size_t k);

enum class StreamMode : std::uint8_t { shuffle, shift };
std::string_view to_string(StreamMode mode);
StreamMode parse_stream_mode(std::string_view text);

/// Row order in which a dataset is fed to an index. `shuffle` is a seeded
/// permutation; `shift` groups rows by generating cluster (clusters in
/// ascending id, rows inside each cluster shuffled) so later inserts come
/// from regions the early index never saw.
std::vector<std::size_t> stream_order(std::size_t n, std::span<const std::uint32_t> cluster_of_row,
                                      StreamMode mode, std::uint64_t seed);

}  // namespace dlmi
