#include "dlmi/baseline/lifecycle.hpp"

#include "dlmi/core/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace dlmi {

void RebuildPolicy::validate() const {
    if (kind == RebuildKind::naive && rebuild_interval < 1) {
        throw InvalidInput("naive rebuild needs rebuild_interval >= 1");
    }
}

std::string RebuildPolicy::label() const {
    if (kind == RebuildKind::none) {
        return "none";
    }
    return "naive(" + std::to_string(rebuild_interval) + ")";
}

namespace {

Dataset current_objects(const Dataset& store, std::span<const float> extra, ObjectId extra_id) {
    Dataset all(store.dimension());
    all.reserve(store.size() + 1);
    for (std::size_t r = 0; r < store.size(); ++r) {
        all.append(store.id(r), store.row(r));
    }
    all.append(extra_id, extra);
    return all;
}

}  // namespace

LifecycleReport run_lifecycle(const Dataset& initial, const Dataset& stream,
                              const RebuildPolicy& policy, std::span<const std::size_t> probe_points,
                              const BuildParams& params, const ProbeFn& probe) {
    policy.validate();
    if (initial.empty()) {
        throw InvalidInput("lifecycle needs a nonempty initial dataset");
    }
    if (!stream.empty() && stream.dimension() != initial.dimension()) {
        throw InvalidInput("stream dimension differs from the initial dataset");
    }
    for (ObjectId id : stream.ids()) {
        if (initial.contains(id)) {
            throw InvalidInput("stream object " + std::to_string(id) + " duplicates an initial id");
        }
    }
    for (std::size_t i = 0; i < probe_points.size(); ++i) {
        if (probe_points[i] > stream.size() || (i > 0 && probe_points[i] <= probe_points[i - 1])) {
            throw InvalidInput("probe points must be ascending and within the stream");
        }
    }

    LifecycleReport report;
    StaticBuild built = build_static(initial, params.target_bucket_size, params.options);
    report.initial_build = built.cost;
    report.cumulative_build = built.cost;
    report.builds = 1;
    Index index = std::move(built.index);

    std::size_t since_build = 0;
    std::size_t next_probe = 0;
    auto take_probe = [&](std::size_t inserts) {
        LifecycleSnapshot snap;
        snap.inserts = inserts;
        snap.db_size = index.size();
        snap.builds = report.builds;
        snap.since_build = since_build;
        snap.cumulative_build = report.cumulative_build;
        if (probe) {
            snap.profile = probe(index, inserts);
        }
        report.snapshots.push_back(std::move(snap));
    };

    for (std::size_t i = 0; i <= stream.size(); ++i) {
        if (next_probe < probe_points.size() && probe_points[next_probe] == i) {
            take_probe(i);
            ++next_probe;
        }
        if (i == stream.size()) {
            break;
        }
        const auto v = stream.row(i);
        const ObjectId id = stream.id(i);
        if (policy.kind == RebuildKind::naive && since_build + 1 == policy.rebuild_interval) {
            Dataset all = current_objects(index.store(), v, id);
            StaticBuild rebuilt = build_static(all, params.target_bucket_size, params.options);
            report.cumulative_build += rebuilt.cost;
            ++report.builds;
            report.rebuilds_at.push_back(i + 1);
            index = std::move(rebuilt.index);
            since_build = 0;
        } else {
            index.insert(id, v);
            ++since_build;
        }
    }
    report.final_index = std::move(index);
    return report;
}

std::vector<std::size_t> fractional_probe_points(std::size_t n, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw InvalidInput("probe fraction must lie in (0, 1]");
    }
    std::vector<std::size_t> points{0};
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / fraction));
    for (std::size_t s = 1; s <= steps; ++s) {
        const auto p = static_cast<std::size_t>(std::llround(static_cast<double>(n) * static_cast<double>(s) / static_cast<double>(steps)));
        if (p > points.back()) {
            points.push_back(p);
        }
    }
    return points;
}

ProbeFn bruteforce_probe(const Dataset& queries, std::size_t k) {
    return [&queries, k](const Index& index, std::size_t) {
        const GroundTruth truth = compute_ground_truth(index.store(), queries, k);
        return recall_profile(index, queries, truth, k);
    };
}

std::string_view to_string(StreamMode mode) {
    return mode == StreamMode::shuffle ? "shuffle" : "shift";
}

StreamMode parse_stream_mode(std::string_view text) {
    if (text == "shuffle") {
        return StreamMode::shuffle;
    }
    if (text == "shift") {
        return StreamMode::shift;
    }
    throw InvalidInput("unknown stream mode '" + std::string(text) + "'");
}

std::vector<std::size_t> stream_order(std::size_t n, std::span<const std::uint32_t> cluster_of_row,
                                      StreamMode mode, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    if (mode == StreamMode::shift) {
        if (cluster_of_row.size() != n) {
            throw InvalidInput("shift mode needs a cluster label per row");
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cluster_of_row[a] < cluster_of_row[b];
        });
    }
    return order;
}

}  // namespace dlmi
