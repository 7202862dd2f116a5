#pragma once

#include "dlmi/core/types.hpp"

#include <cstdint>
#include <vector>

namespace dlmi {

struct SyntheticParams {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::size_t n_clusters = 1;
    std::uint64_t seed = 0;
    /// Standard deviation of the per-component cluster means.
    double center_scale = 10.0;
    /// Standard deviation of points around their cluster mean.
    double noise = 1.0;
};

struct SyntheticData {
    Dataset dataset;
    /// Generating cluster of each row.
    std::vector<std::uint32_t> cluster_of_row;
    /// Cluster means, row-major n_clusters x dim.
    std::vector<double> centers;
};

/// Gaussian blobs with ids 0..n-1. Cluster sizes are balanced (row r belongs
/// to cluster r mod n_clusters before a seeded shuffle). Identical params give
/// byte-identical output. Throws InvalidInput if n, dim or n_clusters is 0.
SyntheticData synthetic_dataset(const SyntheticParams& params);

inline Dataset synthetic_dataset(std::size_t n, std::size_t dim, std::size_t n_clusters,
                                 std::uint64_t seed) {
    return synthetic_dataset(SyntheticParams{n, dim, n_clusters, seed}).dataset;
}

}  // namespace dlmi
