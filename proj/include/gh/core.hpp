#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gh {

using ordered_json = nlohmann::ordered_json;

enum class Linkage { complete, average, ward };

std::string linkage_name(Linkage k);
Linkage linkage_from_name(const std::string& s);

enum class EdgeMark { none, gap, support };

std::string edge_mark_name(EdgeMark m);
EdgeMark edge_mark_from_name(const std::string& s);

// Values in ascending order plus the permutation mapping sorted position to
// original row, so labels and status can be carried through every transform.
struct SortedSample {
  std::vector<double> values;
  std::vector<int> perm;
  std::optional<std::vector<std::string>> labels;
  std::optional<std::vector<int>> status;  // 1 = event, 0 = right-censored

  std::size_t size() const { return values.size(); }
};

SortedSample sort_sample(const std::vector<double>& values,
                         const std::optional<std::vector<std::string>>& labels = std::nullopt,
                         const std::optional<std::vector<int>>& status = std::nullopt);

struct Standardized {
  SortedSample sample;
  double mean = 0.0;
  double sd = 1.0;
};

// Centers and rescales with the n-1 divisor. Throws on degenerate scale.
Standardized standardize(const SortedSample& s);

struct Bin {
  double a = 0.0;
  double b = 0.0;
  int first = 0;  // index range [first, last] into the sorted sample
  int last = 0;
  double dess = 0.0;
  EdgeMark left_gap = EdgeMark::none;
  EdgeMark right_gap = EdgeMark::none;

  int count() const { return last - first + 1; }
};

struct DessBand {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.05;
  int n_calibration = 0;
  int m_replicates = 0;
};

struct GappedHistogram {
  std::vector<Bin> bins;
  double l0 = 0.0;
  DessBand band;
  Linkage linkage = Linkage::complete;
};

// Throws std::invalid_argument when the histogram breaks an invariant:
// bins in ascending order, index ranges tiling [0, n), facing edge marks
// agreeing across every junction.
void validate(const GappedHistogram& h, std::size_t n);

struct GapDecision {
  std::string method;
  bool is_gap = false;
  double left_bhat = 0.0;
  double right_ahat = 0.0;
  bool low_confidence = false;
};

struct Hamiltonian {
  double total_dess = 0.0;
  int n_boundaries = 0;
  double l0 = 0.0;
  double value = 0.0;
};

// Binary tree over a sorted sample. Leaves are ids [0, n); internal nodes
// follow in merge order; every node covers the contiguous leaf range
// [lo, hi].
struct DendroNode {
  double height = 0.0;
  int left = -1;
  int right = -1;
  int lo = 0;
  int hi = 0;
};

struct DendroTree {
  std::vector<DendroNode> nodes;
  int root = -1;

  int n_leaves() const { return root < 0 ? static_cast<int>(nodes.size()) : nodes[root].hi - nodes[root].lo + 1; }
  bool is_leaf(int id) const { return nodes[id].left < 0; }
};

struct TreatmentMatrix {
  std::vector<std::vector<int>> counts;  // J x K
  std::vector<std::string> treatment_names;
  std::vector<int> n_j;
  std::vector<double> edges;  // K + 1

  int n_treatments() const { return static_cast<int>(counts.size()); }
  int n_bins() const { return counts.empty() ? 0 : static_cast<int>(counts[0].size()); }
};

ordered_json to_json(const SortedSample& s);
SortedSample sorted_sample_from_json(const ordered_json& j);

ordered_json to_json(const Bin& b);
Bin bin_from_json(const ordered_json& j);

ordered_json to_json(const DessBand& b);
DessBand band_from_json(const ordered_json& j);

ordered_json to_json(const GappedHistogram& h);
GappedHistogram histogram_from_json(const ordered_json& j);

ordered_json to_json(const GapDecision& d);
GapDecision gap_decision_from_json(const ordered_json& j);

ordered_json to_json(const Hamiltonian& h);
Hamiltonian hamiltonian_from_json(const ordered_json& j);

ordered_json to_json(const DendroTree& t);
DendroTree dendro_tree_from_json(const ordered_json& j);

ordered_json to_json(const TreatmentMatrix& t);
TreatmentMatrix treatment_matrix_from_json(const ordered_json& j);

}  // namespace gh
