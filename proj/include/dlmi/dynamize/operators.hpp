#pragma once

// Structural operators of the dynamized index. Each one leaves the index
// consistent; when IndexOptions::verify_operators is set a failed
// check_consistency raises std::logic_error.

#include "dlmi/index/index.hpp"

#include <span>
#include <string_view>

namespace dlmi {

enum class Operator : std::uint8_t { deepen, broaden, shorten };
std::string_view to_string(Operator op);

struct OperatorReport {
    std::size_t objects_moved = 0;
    Cost cost;
};

/// Turns a leaf into an inner node: clusters its objects into n_child groups,
/// trains a model on the labels and disperses the objects into n_child new
/// leaves by predicted position. Requires 2 <= n_child <= leaf size.
OperatorReport deepen(Index& index, const NodePos& leaf, std::size_t n_child);

/// Rebuilds an inner node's whole subtree as one level of n_child fresh
/// leaves, re-clustering and retraining over every object below it.
OperatorReport broaden(Index& index, const NodePos& inner, std::size_t n_child);

/// Removes the listed leaves: each parent drops the matching output class,
/// remaining siblings are renumbered, and the orphaned objects are re-inserted
/// by plain routing. Every parent must keep at least one child.
OperatorReport shorten(Index& index, std::span<const NodePos> leaves);

}  // namespace dlmi
