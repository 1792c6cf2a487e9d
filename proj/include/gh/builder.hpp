#pragma once

#include <optional>

#include "gh/core.hpp"
#include "gh/hc1d.hpp"
#include "gh/uniformity.hpp"

namespace gh {

// Boundary-coding cost: either a fraction of the tree height (default 0.1)
// or an absolute value.
struct L0Spec {
  double fraction = 0.1;
  std::optional<double> abs;

  double resolve(double tree_h) const { return abs ? *abs : fraction * tree_h; }
};

// Gapped histogram construction. The whole sample is kept as one bin when
// the uniformity criterion accepts it; otherwise the tree is walked from the
// top and a branch becomes a bin once its DESS drops below L0. Junctions are
// then adjudicated with check_gap_boundaries.
GappedHistogram build_histogram(const SortedSample& s, const L0Spec& l0_spec,
                                Linkage linkage, const DessBand& band);

// Extends each side toward the junction by 1/(count+1); a gap is declared
// when the extensions fail to meet. Singleton sides are not extended and
// flag the decision as low confidence.
GapDecision check_gap_boundaries(const SortedSample& s, const Bin& left, const Bin& right);

// Alternative adjudication: both bins take the midpoint of the facing
// extremes as their shared edge and a gap is declared unless both sides
// still pass the uniformity criterion.
GapDecision check_gap_midpoint(const SortedSample& s, const Bin& left, const Bin& right,
                               const DessBand& band);

// Splits any bin whose DESS exceeds L0 at its top merge, as long as the
// split lowers total DESS by more than L0. Requires a histogram built from
// this tree.
GappedHistogram refine(const GappedHistogram& h, const DendroTree& t, const SortedSample& s);

// total_dess + l0 * n_boundaries, where every junction costs one boundary
// and a gapped junction costs two.
Hamiltonian hamiltonian(const GappedHistogram& h);

// Exhaustive minimizer of the Hamiltonian over all segmentations of the
// sorted sample (n <= 14). Gap flags follow check_gap_boundaries. Ties go
// to fewer bins, then lexicographically smallest boundary set.
GappedHistogram brute_force_optimum(const SortedSample& s, double l0, const DessBand& band);

}  // namespace gh
