#include "dlmi/index/index.hpp"

#include "dlmi/core/topk.hpp"
#include "dlmi/simd/kernels.hpp"
#include "dlmi/util/timer.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace dlmi {

// ---------------------------------------------------------------------------
// NodePos

NodePos NodePos::child(std::uint32_t index) const {
    std::vector<std::uint32_t> path = path_;
    path.push_back(index);
    return NodePos(std::move(path));
}

NodePos NodePos::parent() const {
    if (path_.empty()) {
        throw InvalidInput("root has no parent");
    }
    return NodePos(std::vector<std::uint32_t>(path_.begin(), path_.end() - 1));
}

std::string NodePos::to_string() const {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < path_.size(); ++i) {
        out << (i ? "." : "") << path_[i];
    }
    out << ']';
    return out.str();
}

std::string_view to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::object_not_unique: return "object_not_unique";
        case Violation::Kind::object_missing: return "object_missing";
        case Violation::Kind::unknown_object: return "unknown_object";
        case Violation::Kind::child_count_mismatch: return "child_count_mismatch";
        case Violation::Kind::position_mismatch: return "position_mismatch";
        case Violation::Kind::depth_exceeded: return "depth_exceeded";
        case Violation::Kind::model_dimension_mismatch: return "model_dimension_mismatch";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Tree helpers

void reposition(Node& node, const NodePos& pos) {
    node.pos = pos;
    if (!node.is_leaf()) {
        auto& children = node.inner().children;
        for (std::size_t i = 0; i < children.size(); ++i) {
            reposition(*children[i], pos.child(static_cast<std::uint32_t>(i)));
        }
    }
}

namespace {

template <typename NodeT, typename Fn>
void walk(NodeT& node, Fn&& fn) {
    fn(node);
    if (!node.is_leaf()) {
        for (auto& child : node.inner().children) {
            walk(*child, fn);
        }
    }
}

}  // namespace

std::vector<ObjectId> collect_objects(const Node& node) {
    std::vector<ObjectId> out;
    walk(node, [&](const Node& n) {
        if (n.is_leaf()) {
            const auto& objs = n.leaf().objects;
            out.insert(out.end(), objs.begin(), objs.end());
        }
    });
    return out;
}

std::size_t count_leaves(const Node& node) {
    std::size_t leaves = 0;
    walk(node, [&](const Node& n) { leaves += n.is_leaf() ? 1 : 0; });
    return leaves;
}

// ---------------------------------------------------------------------------
// LeafCursor

LeafCursor::LeafCursor(const Node& root, std::span<const float> query) : query_(query) {
    queue_.push({0.0, &root});
}

const Node* LeafCursor::next() {
    while (!queue_.empty()) {
        const Entry top = queue_.top();
        queue_.pop();
        if (top.node->is_leaf()) {
            last_score_ = top.log_score;
            return top.node;
        }
        const auto& inner = top.node->inner();
        scratch_.resize(inner.model.n_classes());
        inner.model.log_proba(query_, scratch_);
        routing_cost_ += inner.model.prediction_cost();
        for (std::size_t c = 0; c < inner.children.size(); ++c) {
            queue_.push({top.log_score + scratch_[c], inner.children[c].get()});
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Index

Index::Index(std::size_t dimension, IndexOptions options)
    : options_(std::move(options)), store_(dimension), root_(std::make_unique<Node>()) {
    root_->body = LeafNode{};
}

void Index::replace_root(std::unique_ptr<Node> root) {
    root_ = std::move(root);
    reposition(*root_, NodePos{});
}

const Node* Index::find(const NodePos& pos) const {
    const Node* node = root_.get();
    for (std::uint32_t step : pos.path()) {
        if (node->is_leaf() || step >= node->inner().children.size()) {
            return nullptr;
        }
        node = node->inner().children[step].get();
    }
    return node;
}

Node* Index::find(const NodePos& pos) {
    return const_cast<Node*>(static_cast<const Index*>(this)->find(pos));
}

NodePos Index::route(std::span<const float> v, std::uint64_t* routing_cost) const {
    if (v.size() != dimension()) {
        throw InvalidInput("vector dimension does not match index dimension");
    }
    const Node* node = root_.get();
    while (!node->is_leaf()) {
        const auto& inner = node->inner();
        const std::size_t c = inner.model.predict(v);
        if (routing_cost != nullptr) {
            *routing_cost += inner.model.prediction_cost();
        }
        node = inner.children[c].get();
    }
    return node->pos;
}

NodePos Index::insert(ObjectId id, std::span<const float> components) {
    if (components.size() != dimension()) {
        throw InvalidInput(
            "vector dimension " + std::to_string(components.size()) +
            " does not match index dimension " + std::to_string(dimension())
        );
    }
    store_.append(id, components);
    return place(id);
}

NodePos Index::place(ObjectId id, std::uint64_t* routing_cost) {
    const NodePos pos = route(store_.vector(id), routing_cost);
    find(pos)->leaf().objects.push_back(id);
    return pos;
}

SearchResult Index::search(std::span<const float> query, std::size_t k,
                           std::size_t bucket_budget) const {
    if (k == 0 || bucket_budget == 0) {
        throw InvalidInput("search needs k >= 1 and bucket_budget >= 1");
    }
    if (query.size() != dimension()) {
        throw InvalidInput("query dimension does not match index dimension");
    }
    SearchResult result;
    TopK best(k);
    LeafCursor leaves(*root_, query);
    const auto& kern = simd::kernels();
    const std::size_t dim = dimension();
    while (result.buckets_visited < bucket_budget) {
        const Node* leaf = leaves.next();
        if (leaf == nullptr) {
            break;
        }
        ++result.buckets_visited;
        for (ObjectId id : leaf->leaf().objects) {
            best.push(kern.l2_squared(query.data(), store_.vector(id).data(), dim), id);
        }
        result.objects_scanned += leaf->leaf().objects.size();
    }
    result.neighbors = best.sorted();
    result.short_result = result.neighbors.size() < k;
    result.routing_cost = leaves.routing_cost();
    return result;
}

void Index::for_each_node(const std::function<void(const Node&)>& fn) const {
    walk(static_cast<const Node&>(*root_), fn);
}

std::optional<Violation> Index::check_consistency() const {
    std::optional<Violation> found;
    std::vector<std::uint8_t> seen(store_.size(), 0);
    std::size_t placed = 0;

    auto visit = [&](auto&& self, const Node& node, const NodePos& expected,
                     std::size_t inner_levels) -> void {
        if (found) {
            return;
        }
        if (node.pos != expected) {
            found = Violation{Violation::Kind::position_mismatch, expected,
                              "node at " + expected.to_string() + " records position " +
                                  node.pos.to_string()};
            return;
        }
        if (node.is_leaf()) {
            for (ObjectId id : node.leaf().objects) {
                if (!store_.contains(id)) {
                    found = Violation{Violation::Kind::unknown_object, expected,
                                      "leaf " + expected.to_string() + " holds unknown id " +
                                          std::to_string(id)};
                    return;
                }
                auto& mark = seen[store_.row_of(id)];
                if (mark != 0) {
                    found = Violation{Violation::Kind::object_not_unique, expected,
                                      "object " + std::to_string(id) + " appears in more than one leaf slot"};
                    return;
                }
                mark = 1;
                ++placed;
            }
            return;
        }
        const auto& inner = node.inner();
        if (inner_levels + 1 > options_.max_depth) {
            found = Violation{Violation::Kind::depth_exceeded, expected,
                              "inner node at " + expected.to_string() + " exceeds max depth " +
                                  std::to_string(options_.max_depth)};
            return;
        }
        if (inner.model.n_classes() != inner.children.size()) {
            found = Violation{Violation::Kind::child_count_mismatch, expected,
                              "inner node at " + expected.to_string() + " has " +
                                  std::to_string(inner.children.size()) + " children but " +
                                  std::to_string(inner.model.n_classes()) + " model outputs"};
            return;
        }
        if (inner.model.dimension() != dimension()) {
            found = Violation{Violation::Kind::model_dimension_mismatch, expected,
                              "model dimension mismatch at " + expected.to_string()};
            return;
        }
        for (std::size_t i = 0; i < inner.children.size(); ++i) {
            self(self, *inner.children[i], expected.child(static_cast<std::uint32_t>(i)),
                 inner_levels + 1);
        }
    };
    visit(visit, *root_, NodePos{}, 0);
    if (!found && placed != store_.size()) {
        for (std::size_t r = 0; r < seen.size(); ++r) {
            if (seen[r] == 0) {
                found = Violation{Violation::Kind::object_missing, NodePos{},
                                  "object " + std::to_string(store_.id(r)) + " is in no leaf"};
                break;
            }
        }
    }
    return found;
}

IndexStats Index::stats() const {
    IndexStats s;
    s.object_count = store_.size();
    std::size_t min_occ = SIZE_MAX;
    walk(static_cast<const Node&>(*root_), [&](const Node& node) {
        s.depth = std::max(s.depth, node.pos.depth() + 1);
        if (node.is_leaf()) {
            const std::size_t occ = node.leaf().objects.size();
            ++s.leaf_count;
            s.leaf_occupancies.push_back(occ);
            s.max_leaf_occupancy = std::max(s.max_leaf_occupancy, occ);
            min_occ = std::min(min_occ, occ);
            const std::size_t bin = occ == 0 ? 0 : std::bit_width(occ);
            if (s.occupancy_histogram.size() <= bin) {
                const std::size_t old = s.occupancy_histogram.size();
                s.occupancy_histogram.resize(bin + 1);
                for (std::size_t b = old; b <= bin; ++b) {
                    s.occupancy_histogram[b].lo = b == 0 ? 0 : std::size_t{1} << (b - 1);
                    s.occupancy_histogram[b].hi = b == 0 ? 1 : std::size_t{1} << b;
                }
            }
            ++s.occupancy_histogram[bin].leaves;
            s.occupancy_histogram[bin].objects += occ;
        } else {
            ++s.inner_count;
            s.single_child_inner += node.inner().children.size() == 1 ? 1 : 0;
        }
    });
    s.min_leaf_occupancy = s.leaf_count == 0 ? 0 : min_occ;
    s.average_leaf_occupancy =
        s.leaf_count == 0 ? 0.0 : static_cast<double>(s.object_count) / static_cast<double>(s.leaf_count);
    return s;
}

std::uint64_t Index::next_seed() {
    // splitmix64 over (seed, counter)
    std::uint64_t z = options_.seed + 0x9e3779b97f4a7c15ULL * (++seed_counter_);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void Index::partition_into(Node& node, std::vector<ObjectId> objects, std::size_t n_child,
                           std::uint64_t seed, Cost& cost) {
    if (objects.empty()) {
        throw InvalidInput("cannot partition an empty object set");
    }
    if (n_child == 0) {
        throw InvalidInput("partition needs at least one child");
    }
    Timer timer;
    Dataset gathered(dimension());
    gathered.reserve(objects.size());
    for (ObjectId id : objects) {
        gathered.append(id, store_.vector(id));
    }
    const std::size_t groups = std::min(n_child, objects.size());
    KMeansResult clusters = kmeans(gathered, groups, seed, options_.kmeans);
    TrainResult trained = train_classifier(gathered, clusters.labels, n_child, options_.model,
                                           seed ^ 0x5bd1e995ULL);

    InnerNode inner;
    inner.model = std::move(trained.model);
    inner.children.reserve(n_child);
    for (std::size_t c = 0; c < n_child; ++c) {
        auto child = std::make_unique<Node>();
        child->body = LeafNode{};
        inner.children.push_back(std::move(child));
    }
    for (std::size_t r = 0; r < objects.size(); ++r) {
        inner.children[trained.positions[r]]->leaf().objects.push_back(objects[r]);
    }
    node.body = std::move(inner);
    reposition(node, node.pos);

    cost.distance_computations += clusters.distance_computations + trained.cost;
    cost.seconds += timer.seconds();
}

StaticBuild build_static(const Dataset& dataset, std::size_t target_bucket_size,
                         IndexOptions options) {
    if (dataset.empty()) {
        throw InvalidInput("cannot build an index over an empty dataset");
    }
    if (target_bucket_size == 0) {
        throw InvalidInput("target bucket size must be at least 1");
    }
    Timer timer;
    const std::uint64_t seed = options.seed;
    StaticBuild out{Index(dataset.dimension(), std::move(options)), Cost{}};
    Index& index = out.index;
    Dataset store(dataset.dimension());
    store.reserve(dataset.size());
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        store.append(dataset.id(r), dataset.row(r));
    }
    index.adopt_store(std::move(store));
    const std::size_t n = dataset.size();
    const std::size_t n_child = std::max<std::size_t>(2, (n + target_bucket_size - 1) / target_bucket_size);
    std::vector<ObjectId> ids(dataset.ids().begin(), dataset.ids().end());
    index.partition_into(index.root(), std::move(ids), n_child, seed, out.cost);
    out.cost.seconds = timer.seconds();
    return out;
}

}  // namespace dlmi
