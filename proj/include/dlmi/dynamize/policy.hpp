#pragma once

#include "dlmi/dynamize/operators.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dlmi {

struct PolicyConfig {
    /// Leaves with fewer objects are shortened.
    std::size_t underflow_min = 5;
    /// Average leaf occupancy must stay strictly below this.
    std::size_t max_avg_leaf_occupancy = 1000;
    /// Maximum number of inner levels.
    std::size_t max_depth = 2;
    /// Fill used to size new children: n_child = max(2, ceil(objects / target_leaf_fill)).
    std::size_t target_leaf_fill = 500;
    /// Inserts between policy sweeps.
    std::size_t check_every = 1;

    /// Throws InvalidInput unless underflow_min < target_leaf_fill <=
    /// max_avg_leaf_occupancy, max_depth >= 1 and check_every >= 1.
    void validate() const;

    friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

enum class Trigger : std::uint8_t { underflow, overflow, manual };
std::string_view to_string(Trigger trigger);

struct ActionRecord {
    Trigger trigger = Trigger::manual;
    Operator op = Operator::deepen;
    NodePos pos;
    std::size_t n_child = 0;
    std::size_t objects_moved = 0;
    Cost cost;
    /// Index size when the action ran.
    std::size_t index_size = 0;
};

struct PolicySweep {
    std::vector<ActionRecord> actions;
    /// A violation remained that no operator could resolve.
    bool stalled = false;
    std::string stall_reason;

    Cost total_cost() const;
};

/// Detects and resolves bound violations: leaves under `underflow_min` are
/// shortened (the root leaf and only children are exempt, having nowhere to
/// send their objects); while the average leaf occupancy is at or above the
/// maximum, the fullest leaf is deepened if it sits above `max_depth`, and
/// otherwise its parent is broadened.
PolicySweep enforce_policies(Index& index, const PolicyConfig& policy);

/// True when the index satisfies all three bounds (root leaf exempt from underflow).
bool within_policy_bounds(const Index& index, const PolicyConfig& policy, std::string* why = nullptr);

class ActionLog {
  public:
    void append(const PolicySweep& sweep);
    void append(const ActionRecord& record) { records_.push_back(record); }

    const std::vector<ActionRecord>& records() const noexcept { return records_; }
    bool empty() const noexcept { return records_.empty(); }
    Cost total_cost() const;

    /// Columns: trigger, operator, pos, n_child, objects_moved, cost_proxy,
    /// cost_seconds, index_size.
    void write_csv(std::ostream& out, bool wall_clock = true) const;

  private:
    std::vector<ActionRecord> records_;
};

/// An index grown one insert at a time with policy sweeps every
/// `check_every` inserts.
class DynamicIndex {
  public:
    DynamicIndex(std::size_t dimension, IndexOptions options, PolicyConfig policy);
    DynamicIndex(Index index, PolicyConfig policy);

    NodePos insert(ObjectId id, std::span<const float> components);
    PolicySweep sweep();

    const Index& index() const noexcept { return index_; }
    Index& index() noexcept { return index_; }
    const PolicyConfig& policy() const noexcept { return policy_; }
    const ActionLog& log() const noexcept { return log_; }
    std::size_t sweeps() const noexcept { return sweeps_; }
    std::size_t stalled_sweeps() const noexcept { return stalled_; }

    /// Called after every sweep.
    std::function<void(const PolicySweep&, const Index&)> on_sweep;

  private:
    Index index_;
    PolicyConfig policy_;
    ActionLog log_;
    std::size_t since_sweep_ = 0;
    std::size_t sweeps_ = 0;
    std::size_t stalled_ = 0;
};

}  // namespace dlmi
