#include "dlmi/dynamize/policy.hpp"

#include "dlmi/util/csv.hpp"

#include <algorithm>
#include <ostream>

namespace dlmi {

void PolicyConfig::validate() const {
    if (!(underflow_min < target_leaf_fill && target_leaf_fill <= max_avg_leaf_occupancy)) {
        throw InvalidInput(
            "policy requires underflow_min < target_leaf_fill <= max_avg_leaf_occupancy"
        );
    }
    if (max_depth < 1) {
        throw InvalidInput("policy max_depth must be at least 1");
    }
    if (check_every < 1) {
        throw InvalidInput("policy check_every must be at least 1");
    }
}

std::string_view to_string(Trigger trigger) {
    switch (trigger) {
        case Trigger::underflow: return "underflow";
        case Trigger::overflow: return "overflow";
        case Trigger::manual: return "manual";
    }
    return "unknown";
}

Cost PolicySweep::total_cost() const {
    Cost total;
    for (const auto& a : actions) {
        total += a.cost;
    }
    return total;
}

namespace {

struct LeafInfo {
    const Node* node;
    const Node* parent;
};

void gather_leaves(const Node& node, const Node* parent, std::vector<LeafInfo>& out) {
    if (node.is_leaf()) {
        out.push_back({&node, parent});
        return;
    }
    for (const auto& child : node.inner().children) {
        gather_leaves(*child, &node, out);
    }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

bool underflowing(const LeafInfo& leaf, const PolicyConfig& policy) {
    return leaf.parent != nullptr && leaf.node->leaf().objects.size() < policy.underflow_min;
}

}  // namespace

bool within_policy_bounds(const Index& index, const PolicyConfig& policy, std::string* why) {
    std::vector<LeafInfo> leaves;
    gather_leaves(index.root(), nullptr, leaves);
    for (const auto& leaf : leaves) {
        if (underflowing(leaf, policy)) {
            if (why) {
                *why = "leaf " + leaf.node->pos.to_string() + " holds " +
                       std::to_string(leaf.node->leaf().objects.size()) + " objects";
            }
            return false;
        }
    }
    const double avg = static_cast<double>(index.size()) / static_cast<double>(leaves.size());
    if (avg >= static_cast<double>(policy.max_avg_leaf_occupancy)) {
        if (why) {
            *why = "average leaf occupancy " + std::to_string(avg);
        }
        return false;
    }
    bool too_deep = false;
    index.for_each_node([&](const Node& n) {
        too_deep = too_deep || (!n.is_leaf() && n.pos.depth() + 1 > policy.max_depth);
    });
    if (too_deep) {
        if (why) {
            *why = "inner node deeper than max depth";
        }
        return false;
    }
    return true;
}

PolicySweep enforce_policies(Index& index, const PolicyConfig& policy) {
    policy.validate();
    PolicySweep sweep;
    const std::size_t max_steps = ceil_div(index.size() + 1, policy.underflow_min) + 8;

    auto record = [&](Trigger trigger, Operator op, const NodePos& pos, std::size_t n_child,
                      const OperatorReport& report) {
        sweep.actions.push_back(
            {trigger, op, pos, n_child, report.objects_moved, report.cost, index.size()}
        );
    };

    for (std::size_t step = 0;; ++step) {
        if (step > max_steps) {
            sweep.stalled = true;
            sweep.stall_reason = "action bound exceeded";
            break;
        }
        std::vector<LeafInfo> leaves;
        gather_leaves(index.root(), nullptr, leaves);

        // Underflow: shorten the first leaf that can give its objects away.
        bool acted = false;
        bool blocked = false;
        for (const auto& leaf : leaves) {
            if (!underflowing(leaf, policy)) {
                continue;
            }
            if (leaf.parent->inner().children.size() < 2) {
                blocked = true;
                continue;
            }
            const NodePos pos = leaf.node->pos;
            const std::vector<NodePos> targets{pos};
            record(Trigger::underflow, Operator::shorten, pos, 0, shorten(index, targets));
            acted = true;
            break;
        }
        if (acted) {
            continue;
        }

        // Overflow: grow the structure at the fullest leaf that admits progress.
        const double avg = static_cast<double>(index.size()) / static_cast<double>(leaves.size());
        if (avg >= static_cast<double>(policy.max_avg_leaf_occupancy)) {
            std::vector<LeafInfo> by_fill = leaves;
            std::stable_sort(by_fill.begin(), by_fill.end(), [](const LeafInfo& a, const LeafInfo& b) {
                return a.node->leaf().objects.size() > b.node->leaf().objects.size();
            });
            for (const auto& leaf : by_fill) {
                const std::size_t size = leaf.node->leaf().objects.size();
                const NodePos pos = leaf.node->pos;
                if (pos.depth() < policy.max_depth) {
                    if (size < 2) {
                        continue;
                    }
                    const std::size_t n_child =
                        std::min(size, std::max<std::size_t>(2, ceil_div(size, policy.target_leaf_fill)));
                    record(Trigger::overflow, Operator::deepen, pos, n_child,
                           deepen(index, pos, n_child));
                    acted = true;
                    break;
                }
                const NodePos parent = pos.parent();
                const Node* parent_node = index.find(parent);
                const std::size_t subtree_objects = collect_objects(*parent_node).size();
                const std::size_t n_child =
                    std::max<std::size_t>(2, ceil_div(subtree_objects, policy.target_leaf_fill));
                if (n_child <= count_leaves(*parent_node)) {
                    continue;  // would not add leaves
                }
                record(Trigger::overflow, Operator::broaden, parent, n_child,
                       broaden(index, parent, n_child));
                acted = true;
                break;
            }
            if (!acted) {
                sweep.stalled = true;
                sweep.stall_reason = "no operator can reduce average leaf occupancy";
                break;
            }
            continue;
        }
        if (blocked) {
            sweep.stalled = true;
            sweep.stall_reason = "underflowing leaf is an only child";
        }
        break;
    }
    return sweep;
}

void ActionLog::append(const PolicySweep& sweep) {
    records_.insert(records_.end(), sweep.actions.begin(), sweep.actions.end());
}

Cost ActionLog::total_cost() const {
    Cost total;
    for (const auto& r : records_) {
        total += r.cost;
    }
    return total;
}

void ActionLog::write_csv(std::ostream& out, bool wall_clock) const {
    out << "trigger,operator,pos,n_child,objects_moved,cost_proxy,cost_seconds,index_size\n";
    for (const auto& r : records_) {
        out << to_string(r.trigger) << ',' << to_string(r.op) << ',' << r.pos.to_string() << ','
            << r.n_child << ',' << r.objects_moved << ',' << r.cost.distance_computations << ','
            << format_double(wall_clock ? r.cost.seconds : 0.0) << ',' << r.index_size << '\n';
    }
}

// ---------------------------------------------------------------------------

DynamicIndex::DynamicIndex(std::size_t dimension, IndexOptions options, PolicyConfig policy)
    : DynamicIndex(Index(dimension, std::move(options)), policy) {}

DynamicIndex::DynamicIndex(Index index, PolicyConfig policy)
    : index_(std::move(index)), policy_(policy) {
    policy_.validate();
    index_.options().max_depth = policy_.max_depth;
}

NodePos DynamicIndex::insert(ObjectId id, std::span<const float> components) {
    NodePos pos = index_.insert(id, components);
    if (++since_sweep_ >= policy_.check_every) {
        sweep();
    }
    return pos;
}

PolicySweep DynamicIndex::sweep() {
    since_sweep_ = 0;
    PolicySweep result = enforce_policies(index_, policy_);
    ++sweeps_;
    stalled_ += result.stalled ? 1 : 0;
    log_.append(result);
    if (on_sweep) {
        on_sweep(result, index_);
    }
    return result;
}

}  // namespace dlmi
