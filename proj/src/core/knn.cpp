#include "dlmi/core/knn.hpp"

#include "dlmi/simd/kernels.hpp"
#include "dlmi/util/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace dlmi {

double squared_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw InvalidInput(
            "distance between vectors of dimension " + std::to_string(a.size()) + " and " +
            std::to_string(b.size())
        );
    }
    return simd::l2_squared(a.data(), b.data(), a.size());
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
    return std::sqrt(squared_distance(a, b));
}

std::vector<Neighbor> knn_bruteforce(const Dataset& dataset, std::span<const float> query,
                                     std::size_t k) {
    if (k == 0) {
        throw InvalidInput("k must be positive");
    }
    if (k > dataset.size()) {
        throw InvalidInput(
            "k = " + std::to_string(k) + " exceeds dataset size " +
            std::to_string(dataset.size())
        );
    }
    if (query.size() != dataset.dimension()) {
        throw InvalidInput("query dimension does not match dataset");
    }
    struct Candidate {
        double d2;
        ObjectId id;
    };
    std::vector<Candidate> all(dataset.size());
    const auto& kern = simd::kernels();
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        all[r] = {kern.l2_squared(query.data(), dataset.row(r).data(), query.size()),
                  dataset.id(r)};
    }
    auto less = [](const Candidate& a, const Candidate& b) {
        return NeighborOrder{}(a.d2, a.id, b.d2, b.id);
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);

    std::vector<Neighbor> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = {all[i].id, std::sqrt(all[i].d2)};
    }
    return out;
}

GroundTruth compute_ground_truth(const Dataset& dataset, const Dataset& queries,
                                 std::size_t k) {
    GroundTruth truth;
    truth.k = k;
    truth.neighbors.resize(queries.size());
    parallel_for(queries.size(), [&](std::size_t q) {
        auto nn = knn_bruteforce(dataset, queries.row(q), k);
        auto& ids = truth.neighbors[q];
        ids.reserve(k);
        for (const auto& n : nn) {
            ids.push_back(n.id);
        }
    });
    return truth;
}

double recall(std::span<const ObjectId> returned, std::span<const ObjectId> truth,
              std::size_t k) {
    if (k == 0 || truth.size() != k) {
        throw InvalidInput("ground-truth list must hold exactly k entries");
    }
    std::unordered_set<ObjectId> expected(truth.begin(), truth.end());
    std::size_t hits = 0;
    std::unordered_set<ObjectId> seen;
    for (ObjectId id : returned) {
        if (expected.contains(id) && seen.insert(id).second) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

PrefixGroundTruth::PrefixGroundTruth(const Dataset& ordered, const Dataset& queries,
                                     std::size_t k)
    : k_(k), n_(ordered.size()), row_ids_(ordered.ids().begin(), ordered.ids().end()) {
    if (k == 0) {
        throw InvalidInput("k must be positive");
    }
    if (queries.dimension() != ordered.dimension()) {
        throw InvalidInput("query dimension does not match dataset");
    }
    ranked_rows_.resize(queries.size());
    parallel_for(queries.size(), [&](std::size_t q) {
        std::vector<double> d2(n_);
        const auto query = queries.row(q);
        for (std::size_t r = 0; r < n_; ++r) {
            d2[r] = simd::l2_squared(query.data(), ordered.row(r).data(), query.size());
        }
        auto& rows = ranked_rows_[q];
        rows.resize(n_);
        std::iota(rows.begin(), rows.end(), 0U);
        std::sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
            return NeighborOrder{}(d2[a], row_ids_[a], d2[b], row_ids_[b]);
        });
    });
}

GroundTruth PrefixGroundTruth::at(std::size_t prefix) const {
    if (prefix < k_ || prefix > n_) {
        throw InvalidInput(
            "prefix " + std::to_string(prefix) + " outside [k, " + std::to_string(n_) + "]"
        );
    }
    GroundTruth truth;
    truth.k = k_;
    truth.neighbors.resize(ranked_rows_.size());
    for (std::size_t q = 0; q < ranked_rows_.size(); ++q) {
        auto& ids = truth.neighbors[q];
        ids.reserve(k_);
        for (std::uint32_t r : ranked_rows_[q]) {
            if (r < prefix) {
                ids.push_back(row_ids_[r]);
                if (ids.size() == k_) {
                    break;
                }
            }
        }
    }
    return truth;
}

}  // namespace dlmi
