#include "dlmi/model/kmeans.hpp"

#include "dlmi/simd/kernels.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace dlmi {
namespace {

void seed_plus_plus(const Dataset& objects, KMeansResult& result, std::mt19937_64& rng) {
    const std::size_t n = objects.size();
    const std::size_t dim = result.dimension;
    const auto& kern = simd::kernels();
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);

    auto add_center = [&](std::size_t row, std::size_t j) {
        chosen[row] = true;
        auto src = objects.row(row);
        std::copy(src.begin(), src.end(), result.centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
        for (std::size_t r = 0; r < n; ++r) {
            nearest[r] = std::min(nearest[r], kern.l2_squared(objects.row(r).data(), src.data(), dim));
        }
        result.distance_computations += n;
    };

    add_center(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng), 0);
    for (std::size_t j = 1; j < result.k; ++j) {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            total += nearest[r];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
            double running = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                running += nearest[r];
                if (nearest[r] > 0.0 && running >= target) {
                    pick = r;
                    break;
                }
            }
            if (pick == n) {
                // Rounding left the target past the running sum; take the last
                // row with positive weight.
                for (std::size_t r = n; r-- > 0;) {
                    if (nearest[r] > 0.0) {
                        pick = r;
                        break;
                    }
                }
            }
        } else {
            // All remaining points coincide with a center.
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        add_center(pick, j);
    }
}

// Returns true if any label changed.
bool assign(const Dataset& objects, KMeansResult& result) {
    const auto& kern = simd::kernels();
    const std::size_t dim = result.dimension;
    bool changed = false;
    double objective = 0.0;
    for (std::size_t r = 0; r < objects.size(); ++r) {
        const float* x = objects.row(r).data();
        std::uint32_t best = 0;
        double best_d = kern.l2_squared(x, result.centroids.data(), dim);
        for (std::size_t j = 1; j < result.k; ++j) {
            const double d = kern.l2_squared(x, result.centroids.data() + j * dim, dim);
            if (d < best_d) {
                best_d = d;
                best = static_cast<std::uint32_t>(j);
            }
        }
        if (result.labels[r] != best) {
            changed = true;
            result.labels[r] = best;
        }
        objective += best_d;
    }
    result.distance_computations += objects.size() * result.k;
    result.objective_history.push_back(objective);
    return changed;
}

void update(const Dataset& objects, KMeansResult& result) {
    const std::size_t dim = result.dimension;
    const std::size_t k = result.k;
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < objects.size(); ++r) {
        const std::uint32_t label = result.labels[r];
        ++counts[label];
        auto x = objects.row(r);
        double* acc = sums.data() + label * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            acc[d] += x[d];
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            continue;
        }
        const double inv = 1.0 / static_cast<double>(counts[j]);
        for (std::size_t d = 0; d < dim; ++d) {
            result.centroids[j * dim + d] = static_cast<float>(sums[j * dim + d] * inv);
        }
    }

    const auto& kern = simd::kernels();
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] != 0) {
            continue;
        }
        std::size_t far_row = objects.size();
        double far_d = 0.0;
        for (std::size_t r = 0; r < objects.size(); ++r) {
            const std::uint32_t label = result.labels[r];
            if (counts[label] < 2) {
                continue;
            }
            const double d = kern.l2_squared(objects.row(r).data(), result.centroids.data() + label * dim, dim);
            if (d > far_d) {
                far_d = d;
                far_row = r;
            }
        }
        result.distance_computations += objects.size();
        if (far_row == objects.size()) {
            continue;  // every remaining point sits on its centroid
        }
        auto x = objects.row(far_row);
        std::copy(x.begin(), x.end(), result.centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
        --counts[result.labels[far_row]];
        result.labels[far_row] = static_cast<std::uint32_t>(j);
        counts[j] = 1;
    }
}

}  // namespace

KMeansResult kmeans(const Dataset& objects, std::size_t k, std::uint64_t seed,
                    const KMeansParams& params) {
    if (k == 0) {
        throw InvalidInput("kmeans requires k >= 1");
    }
    if (k > objects.size()) {
        throw InvalidInput(
            "kmeans k = " + std::to_string(k) + " exceeds object count " +
            std::to_string(objects.size())
        );
    }
    KMeansResult result;
    result.k = k;
    result.dimension = objects.dimension();
    result.centroids.assign(k * result.dimension, 0.0F);
    result.labels.assign(objects.size(), std::numeric_limits<std::uint32_t>::max());

    std::mt19937_64 rng(seed);
    seed_plus_plus(objects, result, rng);

    const std::size_t max_iter = std::max<std::size_t>(1, params.max_iterations);
    for (std::size_t it = 0; it < max_iter; ++it) {
        const bool changed = assign(objects, result);
        result.iterations = it + 1;
        if (!changed) {
            result.converged = true;
            break;
        }
        if (it + 1 == max_iter) {
            break;
        }
        update(objects, result);
    }
    return result;
}

}  // namespace dlmi
