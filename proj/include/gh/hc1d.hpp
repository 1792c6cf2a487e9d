#pragma once

#include <functional>

#include "gh/core.hpp"

namespace gh {

// Agglomerative clustering over a sorted sample, merging adjacent clusters
// only. Distance ties (relative tolerance 1e-9) are broken by smallest
// merged size, then leftmost pair.
DendroTree cluster(const SortedSample& s, Linkage linkage);

// Height of the final merge; 0 for a single-leaf tree.
double tree_height(const DendroTree& t);

enum class Visit { descend, stop };

// Walks internal nodes from the root downward in non-increasing height
// order. When the visitor answers stop, the node's subtree is skipped.
void descend_active(const DendroTree& t, const std::function<Visit(int)>& visit);

}  // namespace gh
