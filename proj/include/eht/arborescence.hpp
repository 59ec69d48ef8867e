#pragma once

#include <cstddef>
#include <span>

namespace eht {

// Weight of the minimum spanning in-tree rooted at `root` on a complete
// digraph: every other node keeps exactly one outgoing edge and all paths
// end at the root. `weights` is node_count x node_count, row = tail.

// Exhaustive search over parent assignments; sums edges in node order.
double min_in_tree_bruteforce(std::span<const double> weights, std::size_t node_count, std::size_t root);

// Chu-Liu/Edmonds on the reversed graph.
double min_in_tree_edmonds(std::span<const double> weights, std::size_t node_count, std::size_t root);

}  // namespace eht
