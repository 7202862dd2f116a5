#include "dlmi/core/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace dlmi {

SyntheticData synthetic_dataset(const SyntheticParams& params) {
    if (params.n == 0 || params.dim == 0 || params.n_clusters == 0) {
        throw InvalidInput("synthetic_dataset requires n, dim and n_clusters > 0");
    }
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SyntheticData out;
    out.centers.resize(params.n_clusters * params.dim);
    for (double& c : out.centers) {
        c = gauss(rng) * params.center_scale;
    }

    out.cluster_of_row.resize(params.n);
    for (std::size_t r = 0; r < params.n; ++r) {
        out.cluster_of_row[r] = static_cast<std::uint32_t>(r % params.n_clusters);
    }
    std::shuffle(out.cluster_of_row.begin(), out.cluster_of_row.end(), rng);

    out.dataset = Dataset(params.dim);
    out.dataset.reserve(params.n);
    std::vector<float> point(params.dim);
    for (std::size_t r = 0; r < params.n; ++r) {
        const double* center = out.centers.data() + out.cluster_of_row[r] * params.dim;
        for (std::size_t j = 0; j < params.dim; ++j) {
            point[j] = static_cast<float>(center[j] + gauss(rng) * params.noise);
        }
        out.dataset.append(static_cast<ObjectId>(r), point);
    }
    return out;
}

}  // namespace dlmi
