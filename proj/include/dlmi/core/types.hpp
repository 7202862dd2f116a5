#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlmi {

using ObjectId = std::uint32_t;

/// Raised for malformed caller input (dimension mismatch, bad ranges, ...).
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by the binary readers; carries the byte offset of the failure.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")")
        , offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

  private:
    std::uint64_t offset_;
};

struct Vector {
    ObjectId id = 0;
    std::vector<float> components;
};

/// Work done by a build, operator or search, in wall-clock seconds and in
/// distance-computation equivalents. The second figure is the
/// hardware-independent proxy used for all cost comparisons.
struct Cost {
    double seconds = 0.0;
    std::uint64_t distance_computations = 0;

    Cost& operator+=(const Cost& other) {
        seconds += other.seconds;
        distance_computations += other.distance_computations;
        return *this;
    }
    friend Cost operator+(Cost a, const Cost& b) { return a += b; }
};

struct Neighbor {
    ObjectId id = 0;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Fixed-dimension vectors with stable ids, stored row-major in one buffer.
/// Only Euclidean distance is supported.
class Dataset {
  public:
    Dataset() = default;
    explicit Dataset(std::size_t dimension);

    /// Dimension 0 means "undefined" and is only legal while the dataset is
    /// empty (e.g. after reading an empty fvecs file).
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    std::span<const float> row(std::size_t r) const {
        return {values_.data() + r * dimension_, dimension_};
    }
    ObjectId id(std::size_t r) const { return ids_[r]; }
    std::span<const ObjectId> ids() const noexcept { return ids_; }
    std::span<const float> values() const noexcept { return values_; }

    bool contains(ObjectId id) const noexcept {
        return id < row_of_id_.size() && row_of_id_[id] != npos;
    }
    /// Row holding `id`; throws InvalidInput if absent.
    std::size_t row_of(ObjectId id) const;
    std::span<const float> vector(ObjectId id) const { return row(row_of(id)); }

    /// Appends a vector. Throws InvalidInput on a duplicate id or a dimension
    /// mismatch. The first append fixes an undefined dimension.
    void append(ObjectId id, std::span<const float> components);
    void append(const Vector& v) { append(v.id, v.components); }
    void reserve(std::size_t n);

    Vector extract(std::size_t r) const;
    /// Rows [begin, end) as a new dataset, ids preserved.
    Dataset slice(std::size_t begin, std::size_t end) const;
    /// Rows in the given order, ids preserved.
    Dataset gather(std::span<const std::size_t> rows) const;

    ObjectId max_id() const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.dimension_ == b.dimension_ && a.ids_ == b.ids_ && a.values_ == b.values_;
    }

  private:
    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

    std::size_t dimension_ = 0;
    std::vector<float> values_;
    std::vector<ObjectId> ids_;
    // Dense id -> row table; ids are expected to be compact (sequential from 0).
    std::vector<std::uint32_t> row_of_id_;
};

/// Per-query lists of true nearest ids, sorted by nondecreasing distance.
struct GroundTruth {
    std::size_t k = 0;
    std::vector<std::vector<ObjectId>> neighbors;

    std::size_t size() const noexcept { return neighbors.size(); }
};

}  // namespace dlmi
