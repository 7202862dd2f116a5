#include "dlmi/dynamize/operators.hpp"

#include "dlmi/util/timer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace dlmi {

std::string_view to_string(Operator op) {
    switch (op) {
        case Operator::deepen: return "deepen";
        case Operator::broaden: return "broaden";
        case Operator::shorten: return "shorten";
    }
    return "unknown";
}

namespace {

void verify(const Index& index, std::string_view op) {
    if (!index.options().verify_operators) {
        return;
    }
    if (auto violation = index.check_consistency()) {
        throw std::logic_error(
            std::string{op} + " left the index inconsistent: " + violation->message
        );
    }
}

}  // namespace

OperatorReport deepen(Index& index, const NodePos& leaf_pos, std::size_t n_child) {
    Node* node = index.find(leaf_pos);
    if (node == nullptr) {
        throw InvalidInput("deepen: no node at " + leaf_pos.to_string());
    }
    if (!node->is_leaf()) {
        throw InvalidInput("deepen: node " + leaf_pos.to_string() + " is not a leaf");
    }
    std::vector<ObjectId> objects = node->leaf().objects;
    if (n_child < 2 || n_child > objects.size()) {
        throw InvalidInput(
            "deepen: n_child " + std::to_string(n_child) + " outside [2, " +
            std::to_string(objects.size()) + "]"
        );
    }
    if (leaf_pos.depth() + 1 > index.options().max_depth) {
        throw InvalidInput("deepen: node " + leaf_pos.to_string() + " already at max depth");
    }
    OperatorReport report;
    report.objects_moved = objects.size();
    index.partition_into(*node, std::move(objects), n_child, index.next_seed(), report.cost);
    verify(index, "deepen");
    return report;
}

OperatorReport broaden(Index& index, const NodePos& inner_pos, std::size_t n_child) {
    Node* node = index.find(inner_pos);
    if (node == nullptr) {
        throw InvalidInput("broaden: no node at " + inner_pos.to_string());
    }
    if (node->is_leaf()) {
        throw InvalidInput("broaden: node " + inner_pos.to_string() + " is a leaf");
    }
    if (n_child < 2) {
        throw InvalidInput("broaden: n_child must be at least 2");
    }
    std::vector<ObjectId> objects = collect_objects(*node);
    if (objects.empty()) {
        throw InvalidInput("broaden: subtree at " + inner_pos.to_string() + " holds no objects");
    }
    OperatorReport report;
    report.objects_moved = objects.size();
    index.partition_into(*node, std::move(objects), n_child, index.next_seed(), report.cost);
    verify(index, "broaden");
    return report;
}

OperatorReport shorten(Index& index, std::span<const NodePos> leaves) {
    Timer timer;
    struct Target {
        Node* parent;
        Node* leaf;
    };
    std::vector<Target> targets;
    std::map<Node*, std::size_t> removals;
    std::set<NodePos> unique;
    for (const NodePos& pos : leaves) {
        if (!unique.insert(pos).second) {
            throw InvalidInput("shorten: position " + pos.to_string() + " listed twice");
        }
        if (pos.is_root()) {
            throw InvalidInput("shorten: the root has no parent");
        }
        Node* leaf = index.find(pos);
        if (leaf == nullptr || !leaf->is_leaf()) {
            throw InvalidInput("shorten: no leaf at " + pos.to_string());
        }
        Node* parent = index.find(pos.parent());
        targets.push_back({parent, leaf});
        ++removals[parent];
    }
    for (const auto& [parent, count] : removals) {
        if (count >= parent->inner().children.size()) {
            throw InvalidInput(
                "shorten: removal would leave " + parent->pos.to_string() + " without children"
            );
        }
    }

    OperatorReport report;
    std::vector<ObjectId> orphans;
    for (const Target& t : targets) {
        auto& inner = t.parent->inner();
        const auto it = std::find_if(inner.children.begin(), inner.children.end(),
                                     [&](const auto& c) { return c.get() == t.leaf; });
        const auto class_index = static_cast<std::size_t>(it - inner.children.begin());
        const auto& objs = t.leaf->leaf().objects;
        orphans.insert(orphans.end(), objs.begin(), objs.end());
        inner.model = remove_output(inner.model, class_index).model;
        inner.children.erase(it);
        reposition(*t.parent, t.parent->pos);
    }
    std::uint64_t routing = 0;
    for (ObjectId id : orphans) {
        index.place(id, &routing);
    }
    report.objects_moved = orphans.size();
    report.cost.distance_computations = routing;
    report.cost.seconds = timer.seconds();
    verify(index, "shorten");
    return report;
}

}  // namespace dlmi
