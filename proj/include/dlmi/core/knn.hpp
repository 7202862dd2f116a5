#pragma once

#include "dlmi/core/types.hpp"

#include <span>
#include <vector>

namespace dlmi {

/// Euclidean distance; components are accumulated in double. Throws
/// InvalidInput when the dimensions differ.
double euclidean_distance(std::span<const float> a, std::span<const float> b);

/// Squared Euclidean distance, the ordering key used for every ranking.
double squared_distance(std::span<const float> a, std::span<const float> b);

/// Total order on candidates: nearer first, ties broken by smaller id.
struct NeighborOrder {
    bool operator()(double d_a, ObjectId a, double d_b, ObjectId b) const noexcept {
        return d_a < d_b || (d_a == d_b && a < b);
    }
};

/// Exact k nearest neighbours of `query`, sorted ascending (ties by id).
/// Throws InvalidInput when k exceeds the dataset size or k == 0.
std::vector<Neighbor> knn_bruteforce(const Dataset& dataset, std::span<const float> query,
                                     std::size_t k);

/// Ground truth for every row of `queries`.
GroundTruth compute_ground_truth(const Dataset& dataset, const Dataset& queries,
                                 std::size_t k);

/// |returned ∩ truth| / k. The truth list must hold exactly k ids.
double recall(std::span<const ObjectId> returned, std::span<const ObjectId> truth,
              std::size_t k);

/// Ground truth for every prefix of a fixed insertion order. Each query's
/// candidates are ranked once; the k nearest among the first m rows are then
/// read off without rescanning. Used to evaluate growing databases.
class PrefixGroundTruth {
  public:
    PrefixGroundTruth(const Dataset& ordered, const Dataset& queries, std::size_t k);

    std::size_t k() const noexcept { return k_; }
    std::size_t capacity() const noexcept { return n_; }

    /// Truth over rows [0, prefix) of the ordered dataset.
    GroundTruth at(std::size_t prefix) const;

  private:
    std::size_t k_;
    std::size_t n_;
    std::vector<ObjectId> row_ids_;
    // Per query, every row index sorted by (distance, id).
    std::vector<std::vector<std::uint32_t>> ranked_rows_;
};

}  // namespace dlmi
