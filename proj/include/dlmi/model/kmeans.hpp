#pragma once

#include "dlmi/core/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dlmi {

struct KMeansParams {
    std::size_t max_iterations = 50;
};

struct KMeansResult {
    std::size_t k = 0;
    std::size_t dimension = 0;
    std::vector<std::uint32_t> labels;
    /// Row-major k x dimension.
    std::vector<float> centroids;
    std::size_t iterations = 0;
    bool converged = false;
    /// Sum of squared distances to the assigned centroid after each assignment step.
    std::vector<double> objective_history;
    std::uint64_t distance_computations = 0;

    std::span<const float> centroid(std::size_t j) const {
        return {centroids.data() + j * dimension, dimension};
    }
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are repaired by
/// moving the point farthest from its centroid into them. Labels are nearest
/// centroids with ties to the lower index. Deterministic for a fixed seed.
/// Throws InvalidInput if k == 0 or k > objects.size().
KMeansResult kmeans(const Dataset& objects, std::size_t k, std::uint64_t seed,
                    const KMeansParams& params = {});

}  // namespace dlmi
