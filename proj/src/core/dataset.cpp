#include "dlmi/core/types.hpp"

#include <algorithm>

namespace dlmi {

Dataset::Dataset(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) {
        throw InvalidInput("dataset dimension must be positive");
    }
}

std::size_t Dataset::row_of(ObjectId id) const {
    if (!contains(id)) {
        throw InvalidInput("object id " + std::to_string(id) + " not in dataset");
    }
    return row_of_id_[id];
}

void Dataset::append(ObjectId id, std::span<const float> components) {
    if (dimension_ == 0) {
        if (components.empty()) {
            throw InvalidInput("cannot append an empty vector");
        }
        dimension_ = components.size();
    }
    if (components.size() != dimension_) {
        throw InvalidInput(
            "vector dimension " + std::to_string(components.size()) +
            " does not match dataset dimension " + std::to_string(dimension_)
        );
    }
    if (id == npos) {
        throw InvalidInput("object id out of range");
    }
    if (contains(id)) {
        throw InvalidInput("duplicate object id " + std::to_string(id));
    }
    if (id >= row_of_id_.size()) {
        row_of_id_.resize(std::max<std::size_t>(id + 1, row_of_id_.size() * 3 / 2), npos);
    }
    row_of_id_[id] = static_cast<std::uint32_t>(ids_.size());
    ids_.push_back(id);
    values_.insert(values_.end(), components.begin(), components.end());
}

void Dataset::reserve(std::size_t n) {
    ids_.reserve(n);
    values_.reserve(n * dimension_);
}

Vector Dataset::extract(std::size_t r) const {
    auto comps = row(r);
    return Vector{ids_[r], {comps.begin(), comps.end()}};
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) {
        throw InvalidInput("dataset slice out of range");
    }
    Dataset out;
    out.dimension_ = dimension_;
    out.reserve(end - begin);
    for (std::size_t r = begin; r < end; ++r) {
        out.append(ids_[r], row(r));
    }
    return out;
}

Dataset Dataset::gather(std::span<const std::size_t> rows) const {
    Dataset out;
    out.dimension_ = dimension_;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        out.append(ids_.at(r), row(r));
    }
    return out;
}

ObjectId Dataset::max_id() const {
    if (ids_.empty()) {
        throw InvalidInput("max_id of an empty dataset");
    }
    return *std::max_element(ids_.begin(), ids_.end());
}

}  // namespace dlmi
