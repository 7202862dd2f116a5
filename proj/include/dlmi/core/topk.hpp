#pragma once

#include "dlmi/core/knn.hpp"
#include "dlmi/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace dlmi {

/// Bounded max-heap keeping the k best candidates under NeighborOrder.
class TopK {
  public:
    struct Candidate {
        double d2;
        ObjectId id;
    };

    struct PushOutcome {
        bool accepted = false;
        std::optional<ObjectId> evicted;
    };

    explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

    std::size_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return heap_.size(); }

    PushOutcome push(double d2, ObjectId id) {
        if (heap_.size() < k_) {
            heap_.push_back({d2, id});
            std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
            return {true, std::nullopt};
        }
        const Candidate& top = heap_.front();
        if (!NeighborOrder{}(d2, id, top.d2, top.id)) {
            return {false, std::nullopt};
        }
        const ObjectId evicted = top.id;
        std::pop_heap(heap_.begin(), heap_.end(), worse_on_top);
        heap_.back() = {d2, id};
        std::push_heap(heap_.begin(), heap_.end(), worse_on_top);
        return {true, evicted};
    }

    /// Candidates sorted best first; distances are Euclidean.
    std::vector<Neighbor> sorted() const {
        std::vector<Candidate> items = heap_;
        std::sort(items.begin(), items.end(), worse_on_top);
        std::vector<Neighbor> out;
        out.reserve(items.size());
        for (const auto& c : items) {
            out.push_back({c.id, std::sqrt(c.d2)});
        }
        return out;
    }

  private:
    static bool worse_on_top(const Candidate& a, const Candidate& b) {
        return NeighborOrder{}(a.d2, a.id, b.d2, b.id);
    }

    std::size_t k_;
    std::vector<Candidate> heap_;
};

}  // namespace dlmi
