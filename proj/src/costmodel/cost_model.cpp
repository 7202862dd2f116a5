#include "dlmi/costmodel/cost_model.hpp"

#include "dlmi/core/topk.hpp"
#include "dlmi/simd/kernels.hpp"
#include "dlmi/util/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace dlmi {

void CostScenario::validate() const {
    if (!(querying_frequency > 0.0)) {
        throw InvalidInput("querying frequency must be positive");
    }
    if (!(target_recall > 0.0 && target_recall <= 1.0)) {
        throw InvalidInput("target recall must lie in (0, 1]");
    }
}

double build_share(double build_cost, double rebuild_interval, double querying_frequency) {
    if (!(rebuild_interval >= 1.0)) {
        throw InvalidInput("rebuild interval must be at least 1");
    }
    if (!(querying_frequency > 0.0)) {
        throw InvalidInput("querying frequency must be positive");
    }
    if (build_cost < 0.0) {
        throw InvalidInput("build cost must be nonnegative");
    }
    return build_cost / (rebuild_interval * querying_frequency);
}

double amortized_cost(double search_cost, double build_cost, double rebuild_interval,
                      double querying_frequency) {
    if (search_cost < 0.0) {
        throw InvalidInput("search cost must be nonnegative");
    }
    return search_cost + build_share(build_cost, rebuild_interval, querying_frequency);
}

// ---------------------------------------------------------------------------
// Recall profile

double RecallProfile::mean_recall(std::size_t budget) const {
    return static_cast<double>(total_hits.at(budget - 1)) /
           (static_cast<double>(k) * static_cast<double>(queries));
}

double RecallProfile::mean_scanned(std::size_t budget) const {
    return static_cast<double>(total_scanned.at(budget - 1)) / static_cast<double>(queries);
}

double RecallProfile::mean_seconds(std::size_t budget) const {
    return total_seconds.at(budget - 1) / static_cast<double>(queries);
}

std::size_t RecallProfile::minimal_budget(double target_recall) const {
    // Compare hit counts against the target in exact integer form where possible.
    const double needed = target_recall * static_cast<double>(k) * static_cast<double>(queries);
    for (std::size_t b = 1; b <= leaf_count; ++b) {
        if (static_cast<double>(total_hits[b - 1]) + 1e-9 >= needed) {
            return b;
        }
    }
    std::ostringstream msg;
    msg << "target recall " << target_recall << " unreachable; best achievable "
        << (leaf_count ? mean_recall(leaf_count) : 0.0);
    throw std::runtime_error(msg.str());
}

RecallProfile recall_profile(const Index& index, const Dataset& queries,
                             const GroundTruth& truth, std::size_t k) {
    if (truth.size() != queries.size()) {
        throw InvalidInput("ground truth does not cover every query");
    }
    if (k == 0) {
        throw InvalidInput("k must be positive");
    }
    for (const auto& list : truth.neighbors) {
        if (list.size() != k) {
            throw InvalidInput("ground-truth lists must hold exactly k ids");
        }
    }
    RecallProfile profile;
    profile.k = k;
    profile.queries = queries.size();
    profile.leaf_count = count_leaves(index.root());

    struct PerQuery {
        std::vector<std::uint32_t> hits;
        std::vector<std::uint64_t> scanned;
        std::vector<double> seconds;
    };
    std::vector<PerQuery> per_query(queries.size());
    const std::size_t dim = index.dimension();
    const Dataset& store = index.store();

    parallel_for(queries.size(), [&](std::size_t q) {
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();
        const auto query = queries.row(q);
        const std::unordered_set<ObjectId> expected(truth.neighbors[q].begin(), truth.neighbors[q].end());
        const auto& kern = simd::kernels();
        TopK best(k);
        std::uint32_t hits = 0;
        std::uint64_t scanned = 0;
        auto& out = per_query[q];
        out.hits.reserve(profile.leaf_count);
        LeafCursor cursor = index.cursor(query);
        while (const Node* leaf = cursor.next()) {
            for (ObjectId id : leaf->leaf().objects) {
                const auto outcome = best.push(kern.l2_squared(query.data(), store.vector(id).data(), dim), id);
                if (outcome.accepted) {
                    hits += expected.contains(id) ? 1 : 0;
                    if (outcome.evicted && expected.contains(*outcome.evicted)) {
                        --hits;
                    }
                }
            }
            scanned += leaf->leaf().objects.size();
            out.hits.push_back(hits);
            out.scanned.push_back(scanned);
            out.seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());
        }
    });

    profile.total_hits.assign(profile.leaf_count, 0);
    profile.total_scanned.assign(profile.leaf_count, 0);
    profile.total_seconds.assign(profile.leaf_count, 0.0);
    for (const auto& pq : per_query) {
        for (std::size_t b = 0; b < profile.leaf_count; ++b) {
            profile.total_hits[b] += pq.hits[b];
            profile.total_scanned[b] += pq.scanned[b];
            profile.total_seconds[b] += pq.seconds[b];
        }
    }
    return profile;
}

SearchCost search_cost_at(const RecallProfile& profile, double target_recall) {
    if (!(target_recall > 0.0 && target_recall <= 1.0)) {
        throw InvalidInput("target recall must lie in (0, 1]");
    }
    SearchCost cost;
    cost.budget = profile.minimal_budget(target_recall);
    cost.mean_recall = profile.mean_recall(cost.budget);
    cost.proxy = profile.mean_scanned(cost.budget);
    cost.seconds = profile.mean_seconds(cost.budget);
    return cost;
}

SearchCost measure_search_cost(const Index& index, const Dataset& queries,
                               const GroundTruth& truth, double target_recall, std::size_t k) {
    return search_cost_at(recall_profile(index, queries, truth, k), target_recall);
}

// ---------------------------------------------------------------------------
// Curves

PiecewiseLinear::PiecewiseLinear(std::vector<double> t, std::vector<double> values)
    : t_(std::move(t)), v_(std::move(values)) {
    if (t_.size() != v_.size() || t_.empty()) {
        throw InvalidInput("piecewise-linear curve needs matching, nonempty knots");
    }
    for (std::size_t i = 1; i < t_.size(); ++i) {
        if (!(t_[i] > t_[i - 1])) {
            throw InvalidInput("piecewise-linear knots must be strictly increasing");
        }
    }
}

double PiecewiseLinear::at(double t) const {
    if (t <= t_.front()) {
        return v_.front();
    }
    if (t >= t_.back()) {
        return v_.back();
    }
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
    return v_[lo] + w * (v_[hi] - v_[lo]);
}

double PiecewiseLinear::mean_over(double horizon) const {
    if (!(horizon > 0.0)) {
        throw InvalidInput("mean horizon must be positive");
    }
    // Integrate segment by segment over [0, horizon), flat outside the knots.
    double area = 0.0;
    double cursor = 0.0;
    if (t_.front() > 0.0) {
        const double end = std::min(horizon, t_.front());
        area += v_.front() * end;
        cursor = end;
    }
    for (std::size_t i = 0; i + 1 < t_.size() && cursor < horizon; ++i) {
        const double a = std::max(t_[i], cursor);
        const double b = std::min(t_[i + 1], horizon);
        if (b <= a) {
            continue;
        }
        area += 0.5 * (at(a) + at(b)) * (b - a);
        cursor = b;
    }
    if (cursor < horizon) {
        area += v_.back() * (horizon - cursor);
    }
    return area / horizon;
}

DeteriorationCurve deterioration_curve(std::span<const ProbeSample> samples, double target_recall) {
    DeteriorationCurve curve;
    curve.target_recall = target_recall;
    std::vector<double> t, proxy, seconds;
    for (const auto& s : samples) {
        DeteriorationPoint p{s.inserts, s.db_size, search_cost_at(s.profile, target_recall)};
        t.push_back(static_cast<double>(s.inserts));
        proxy.push_back(p.cost.proxy);
        seconds.push_back(p.cost.seconds);
        curve.points.push_back(p);
    }
    if (!t.empty()) {
        curve.proxy = PiecewiseLinear(t, proxy);
        curve.seconds = PiecewiseLinear(std::move(t), std::move(seconds));
    }
    return curve;
}

RiOptimization optimal_rebuild_interval(double build_cost, const PiecewiseLinear& search_cost,
                                        double querying_frequency, std::span<const double> grid) {
    if (grid.empty()) {
        throw InvalidInput("rebuild-interval grid is empty");
    }
    if (search_cost.empty()) {
        throw InvalidInput("search-cost curve is empty");
    }
    RiOptimization out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw InvalidInput("rebuild-interval grid must be ascending");
        }
        RiRow row;
        row.rebuild_interval = grid[i];
        row.mean_search_cost = search_cost.mean_over(grid[i]);
        row.build_share = build_share(build_cost, grid[i], querying_frequency);
        row.amortized_cost = row.mean_search_cost + row.build_share;
        out.table.push_back(row);
        if (row.amortized_cost < out.table[out.best].amortized_cost) {
            out.best = i;
        }
    }
    return out;
}

std::vector<double> log_spaced_grid(double lo, double hi, std::size_t per_decade) {
    if (!(lo >= 1.0) || !(hi >= lo) || per_decade == 0) {
        throw InvalidInput("log grid needs 1 <= lo <= hi and per_decade > 0");
    }
    std::vector<double> grid;
    const double step = 1.0 / static_cast<double>(per_decade);
    const double span = std::log10(hi / lo);
    const auto count = static_cast<std::size_t>(std::floor(span / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) {
        const double v = std::round(lo * std::pow(10.0, static_cast<double>(i) * step));
        if (grid.empty() || v > grid.back()) {
            grid.push_back(v);
        }
    }
    if (std::round(hi) > grid.back()) {
        grid.push_back(std::round(hi));
    }
    return grid;
}

bool is_unimodal(std::span<const double> values) {
    if (values.empty()) {
        return true;
    }
    const auto min_it = std::min_element(values.begin(), values.end());
    const auto m = static_cast<std::size_t>(min_it - values.begin());
    for (std::size_t i = 1; i <= m; ++i) {
        if (values[i] > values[i - 1]) {
            return false;
        }
    }
    for (std::size_t i = m + 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1]) {
            return false;
        }
    }
    return true;
}

}  // namespace dlmi
