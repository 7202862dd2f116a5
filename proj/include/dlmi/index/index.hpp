#pragma once

// A learned metric index: inner nodes hold classifiers that route vectors to
// their children, leaves hold buckets of object ids. Vector payloads live once
// in the index's store; structural operators only move ids.

#include "dlmi/core/types.hpp"
#include "dlmi/model/classifier.hpp"
#include "dlmi/model/kmeans.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dlmi {

/// Path of child indices from the root (root = empty path).
class NodePos {
  public:
    NodePos() = default;
    explicit NodePos(std::vector<std::uint32_t> path) : path_(std::move(path)) {}
    NodePos(std::initializer_list<std::uint32_t> path) : path_(path) {}

    std::span<const std::uint32_t> path() const noexcept { return path_; }
    std::size_t depth() const noexcept { return path_.size(); }
    bool is_root() const noexcept { return path_.empty(); }

    NodePos child(std::uint32_t index) const;
    NodePos parent() const;
    std::uint32_t last() const { return path_.back(); }

    std::string to_string() const;

    friend auto operator<=>(const NodePos&, const NodePos&) = default;
    friend bool operator==(const NodePos&, const NodePos&) = default;

  private:
    std::vector<std::uint32_t> path_;
};

struct Node;

struct LeafNode {
    std::vector<ObjectId> objects;
};

struct InnerNode {
    ClassifierModel model;
    std::vector<std::unique_ptr<Node>> children;
};

struct Node {
    NodePos pos;
    std::variant<LeafNode, InnerNode> body;

    bool is_leaf() const noexcept { return std::holds_alternative<LeafNode>(body); }
    LeafNode& leaf() { return std::get<LeafNode>(body); }
    const LeafNode& leaf() const { return std::get<LeafNode>(body); }
    InnerNode& inner() { return std::get<InnerNode>(body); }
    const InnerNode& inner() const { return std::get<InnerNode>(body); }
};

struct IndexOptions {
    ModelConfig model;
    KMeansParams kmeans;
    std::uint64_t seed = 0;
    /// Maximum number of inner levels (root counts as one).
    std::size_t max_depth = 2;
    /// Run check_consistency after every structural operator and throw on failure.
    bool verify_operators = true;
};

struct SearchResult {
    std::vector<Neighbor> neighbors;
    std::size_t buckets_visited = 0;
    /// Distance computations against indexed objects (the search-cost proxy).
    std::uint64_t objects_scanned = 0;
    /// Classifier evaluations spent routing, in distance-computation equivalents.
    std::uint64_t routing_cost = 0;
    /// Fewer than k objects were scanned.
    bool short_result = false;
};

struct Violation {
    enum class Kind {
        object_not_unique,
        object_missing,
        unknown_object,
        child_count_mismatch,
        position_mismatch,
        depth_exceeded,
        model_dimension_mismatch,
    };
    Kind kind;
    NodePos pos;
    std::string message;
};

std::string_view to_string(Violation::Kind kind);

struct OccupancyBin {
    std::size_t lo = 0;  // inclusive
    std::size_t hi = 0;  // exclusive
    std::size_t leaves = 0;
    std::size_t objects = 0;
};

struct IndexStats {
    std::size_t object_count = 0;
    std::size_t leaf_count = 0;
    std::size_t inner_count = 0;
    /// Levels on the deepest root-to-leaf path (a root leaf alone is depth 1).
    std::size_t depth = 0;
    double average_leaf_occupancy = 0.0;
    std::size_t max_leaf_occupancy = 0;
    std::size_t min_leaf_occupancy = 0;
    /// Per leaf, in preorder.
    std::vector<std::size_t> leaf_occupancies;
    /// Power-of-two bins: [0,1), [1,2), [2,4), ...
    std::vector<OccupancyBin> occupancy_histogram;
    /// Inner nodes left with a single child (an unresolvable shape for shorten).
    std::size_t single_child_inner = 0;
};

/// Best-first enumeration of leaves. Children are scored by the product of
/// branch probabilities (held in log space); ties go to the lexicographically
/// smaller position. The visit order does not depend on how many leaves the
/// caller eventually consumes.
class LeafCursor {
  public:
    LeafCursor(const Node& root, std::span<const float> query);

    /// Next leaf, or nullptr once every leaf has been produced.
    const Node* next();
    double last_log_score() const noexcept { return last_score_; }
    std::uint64_t routing_cost() const noexcept { return routing_cost_; }

  private:
    struct Entry {
        double log_score;
        const Node* node;
    };
    struct Lower {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.log_score != b.log_score) {
                return a.log_score < b.log_score;
            }
            return a.node->pos > b.node->pos;
        }
    };

    std::span<const float> query_;
    std::priority_queue<Entry, std::vector<Entry>, Lower> queue_;
    std::vector<double> scratch_;
    double last_score_ = 0.0;
    std::uint64_t routing_cost_ = 0;
};

class Index {
  public:
    /// Empty index: a single root leaf.
    explicit Index(std::size_t dimension, IndexOptions options = {});

    Index(Index&&) noexcept = default;
    Index& operator=(Index&&) noexcept = default;
    Index(const Index&) = delete;
    Index& operator=(const Index&) = delete;

    std::size_t dimension() const noexcept { return store_.dimension(); }
    std::size_t size() const noexcept { return store_.size(); }
    const IndexOptions& options() const noexcept { return options_; }
    IndexOptions& options() noexcept { return options_; }
    const Dataset& store() const noexcept { return store_; }

    const Node& root() const noexcept { return *root_; }
    Node& root() noexcept { return *root_; }
    void replace_root(std::unique_ptr<Node> root);

    const Node* find(const NodePos& pos) const;
    Node* find(const NodePos& pos);

    /// Adds a vector to the store and appends its id to the routed leaf.
    /// Throws InvalidInput for a duplicate id or dimension mismatch.
    NodePos insert(ObjectId id, std::span<const float> components);
    NodePos insert(const Vector& v) { return insert(v.id, v.components); }

    /// Routes an object already held in the store and appends it to a leaf.
    NodePos place(ObjectId id, std::uint64_t* routing_cost = nullptr);

    /// Leaf chosen by argmax routing from the root.
    NodePos route(std::span<const float> v, std::uint64_t* routing_cost = nullptr) const;

    /// Visits at most `bucket_budget` leaves in best-first order and returns
    /// the k nearest scanned objects. Throws InvalidInput if k or the budget is 0.
    SearchResult search(std::span<const float> query, std::size_t k,
                        std::size_t bucket_budget) const;

    LeafCursor cursor(std::span<const float> query) const { return LeafCursor(*root_, query); }

    std::optional<Violation> check_consistency() const;
    IndexStats stats() const;

    void for_each_node(const std::function<void(const Node&)>& fn) const;

    /// Replaces `node` with a fresh inner node whose children are leaves
    /// populated by a classifier trained on k-means labels of `objects`.
    /// `n_child` children are always created; clustering uses
    /// min(n_child, |objects|) groups. Adds the work done to `cost`.
    void partition_into(Node& node, std::vector<ObjectId> objects, std::size_t n_child,
                        std::uint64_t seed, Cost& cost);

    /// Deterministic per-operation seed derived from the index seed.
    std::uint64_t next_seed();
    std::uint64_t seed_counter() const noexcept { return seed_counter_; }
    void set_seed_counter(std::uint64_t c) noexcept { seed_counter_ = c; }

    /// Store access for persistence.
    void adopt_store(Dataset store) { store_ = std::move(store); }

  private:
    IndexOptions options_;
    Dataset store_;
    std::unique_ptr<Node> root_;
    std::uint64_t seed_counter_ = 0;
};

/// Rewrites the stored positions of `node`'s subtree so they match `pos`.
void reposition(Node& node, const NodePos& pos);

/// Ids held in the subtree rooted at `node`, in preorder leaf order.
std::vector<ObjectId> collect_objects(const Node& node);
std::size_t count_leaves(const Node& node);

struct StaticBuild {
    Index index;
    Cost cost;
};

/// Single-level index: a root classifier with max(2, ceil(n / target)) leaf
/// children. Throws InvalidInput on an empty dataset or zero target.
StaticBuild build_static(const Dataset& dataset, std::size_t target_bucket_size,
                         IndexOptions options = {});

}  // namespace dlmi
