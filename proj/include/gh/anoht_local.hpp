#pragma once

#include <cstdint>
#include <vector>

#include "gh/core.hpp"

namespace gh {

struct BinComparison {
  int bin_index = 0;
  std::vector<int> counts;  // one per treatment
  double entropy_ratio = 0.0;
  double p_value = 1.0;
};

struct GlobalTest {
  double weighted_entropy = 0.0;
  double p_value = 1.0;
};

// Cross-tabulates treatments (sample labels) against histogram bins.
// Treatment order is first appearance in the original row order.
TreatmentMatrix bin_compositions(const GappedHistogram& h, const SortedSample& s);

// Shannon entropy of the column proportions over the entropy of the
// treatment-size proportions, natural log. Returns 1 when the denominator
// is degenerate (single treatment).
double entropy_ratio(const std::vector<int>& column, const std::vector<int>& n_j);

// Permutation p-value for one bin: treatment labels are redrawn without
// replacement from the pooled label multiset, and low entropy ratios count
// as at least as extreme. p = (1 + #{sim <= obs}) / (B + 1).
double bin_pvalue(const TreatmentMatrix& t, int bin_index, int n_permutations,
                  std::uint64_t seed);

// Entropy ratio for real-valued compositions (e.g. survival-weighted
// counts), same conventions as the integer version.
double entropy_ratio_weighted(const std::vector<double>& column,
                              const std::vector<double>& base);

// Size-weighted entropy ratio across all bins with the same permutation
// scheme applied to the whole matrix.
GlobalTest global_test(const TreatmentMatrix& t, int n_permutations, std::uint64_t seed);

ordered_json to_json(const BinComparison& c);
ordered_json to_json(const GlobalTest& g);

}  // namespace gh
