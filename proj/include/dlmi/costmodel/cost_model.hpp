#pragma once

// Amortized query cost: AC = SC + BC / (RI * QF), where SC is the per-query
// search cost at a target recall, BC the build cost, RI the number of inserts
// a build is amortized over and QF the number of queries per insert.

#include "dlmi/core/types.hpp"
#include "dlmi/index/index.hpp"

#include <span>
#include <vector>

namespace dlmi {

struct CostScenario {
    double querying_frequency = 1.0;
    double target_recall = 0.9;

    /// Throws InvalidInput unless QF > 0 and 0 < TR <= 1.
    void validate() const;
    friend bool operator==(const CostScenario&, const CostScenario&) = default;
};

/// Throws InvalidInput for RI < 1, QF <= 0, or negative costs.
double amortized_cost(double search_cost, double build_cost, double rebuild_interval,
                      double querying_frequency);

/// The build-cost share BC / (RI * QF) on its own.
double build_share(double build_cost, double rebuild_interval, double querying_frequency);

/// Recall and cost of best-first search for every bucket budget 1..leaf_count,
/// averaged over a query set. Entry b-1 describes budget b.
struct RecallProfile {
    std::size_t k = 0;
    std::size_t queries = 0;
    std::size_t leaf_count = 0;
    /// Summed over queries: hits among the returned top-k.
    std::vector<std::uint64_t> total_hits;
    /// Summed over queries: objects scanned.
    std::vector<std::uint64_t> total_scanned;
    /// Summed over queries: wall-clock seconds to reach that budget.
    std::vector<double> total_seconds;

    double mean_recall(std::size_t budget) const;
    double mean_scanned(std::size_t budget) const;
    double mean_seconds(std::size_t budget) const;

    /// Smallest budget whose mean recall reaches `target_recall`. Throws
    /// std::runtime_error naming the best achievable recall if none does.
    std::size_t minimal_budget(double target_recall) const;
};

/// Runs every query through the full best-first leaf order and records the
/// returned top-k after each visited leaf. `truth` must hold k ids per query.
RecallProfile recall_profile(const Index& index, const Dataset& queries,
                             const GroundTruth& truth, std::size_t k);

struct SearchCost {
    std::size_t budget = 0;
    double mean_recall = 0.0;
    /// Mean objects scanned per query.
    double proxy = 0.0;
    double seconds = 0.0;
};

SearchCost search_cost_at(const RecallProfile& profile, double target_recall);

/// Minimal bucket budget achieving `target_recall` on average and the mean
/// per-query cost at that budget.
SearchCost measure_search_cost(const Index& index, const Dataset& queries,
                               const GroundTruth& truth, double target_recall, std::size_t k);

/// Piecewise-linear function through (t, value) knots, flat beyond the ends.
class PiecewiseLinear {
  public:
    PiecewiseLinear() = default;
    /// Knots must have strictly increasing t. Throws InvalidInput otherwise.
    PiecewiseLinear(std::vector<double> t, std::vector<double> values);

    double at(double t) const;
    /// (1/T) * integral over [0, T) of the function; T must be positive.
    double mean_over(double horizon) const;

    std::span<const double> knots() const noexcept { return t_; }
    std::span<const double> values() const noexcept { return v_; }
    bool empty() const noexcept { return t_.empty(); }

  private:
    std::vector<double> t_;
    std::vector<double> v_;
};

/// A recall profile measured after a number of inserts since the last build.
struct ProbeSample {
    std::size_t inserts = 0;
    std::size_t db_size = 0;
    RecallProfile profile;
};

struct DeteriorationPoint {
    std::size_t inserts = 0;
    std::size_t db_size = 0;
    SearchCost cost;
};

/// SC(t) at one target recall, t = inserts since build.
struct DeteriorationCurve {
    double target_recall = 0.0;
    std::vector<DeteriorationPoint> points;
    PiecewiseLinear proxy;
    PiecewiseLinear seconds;
};

DeteriorationCurve deterioration_curve(std::span<const ProbeSample> samples, double target_recall);

struct RiRow {
    double rebuild_interval = 0.0;
    double mean_search_cost = 0.0;
    double build_share = 0.0;
    double amortized_cost = 0.0;
};

struct RiOptimization {
    std::vector<RiRow> table;
    std::size_t best = 0;

    double best_interval() const { return table.at(best).rebuild_interval; }
};

/// AC(RI) = mean of SC(t) over [0, RI) + BC / (RI * QF) for every RI in the
/// ascending grid; returns the table and its minimizer (first on ties).
RiOptimization optimal_rebuild_interval(double build_cost, const PiecewiseLinear& search_cost,
                                        double querying_frequency, std::span<const double> grid);

/// Integer grid with `per_decade` log-spaced points from lo to hi inclusive.
std::vector<double> log_spaced_grid(double lo, double hi, std::size_t per_decade);

/// True when the sequence has no strict local minimum other than its global
/// minimum: nonincreasing up to the first minimum, nondecreasing after it.
bool is_unimodal(std::span<const double> values);

}  // namespace dlmi
