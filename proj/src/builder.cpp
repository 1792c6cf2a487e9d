#include "gh/builder.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace gh {

namespace {

struct Block {
  int first;
  int last;
  double dess;
};

double seg_dess(const std::vector<double>& v, int first, int last) {
  std::span<const double> seg(v.data() + first, static_cast<std::size_t>(last - first + 1));
  return dess(seg, v[first], v[last]);
}

double extension(int count) {
  return count >= 2 ? 1.0 / static_cast<double>(count + 1) : 0.0;
}

GappedHistogram assemble(const SortedSample& s, std::vector<Block> blocks, double l0,
                         const DessBand& band, Linkage linkage) {
  std::sort(blocks.begin(), blocks.end(),
            [](const Block& x, const Block& y) { return x.first < y.first; });
  const std::vector<double>& v = s.values;

  GappedHistogram h;
  h.l0 = l0;
  h.band = band;
  h.linkage = linkage;
  h.bins.reserve(blocks.size());
  for (const Block& blk : blocks) {
    Bin b;
    b.first = blk.first;
    b.last = blk.last;
    b.dess = blk.dess;
    b.a = v[blk.first];
    b.b = v[blk.last];
    h.bins.push_back(b);
  }

  for (std::size_t k = 0; k + 1 < h.bins.size(); ++k) {
    Bin& left = h.bins[k];
    Bin& right = h.bins[k + 1];
    GapDecision d = check_gap_boundaries(s, left, right);
    if (d.is_gap) {
      left.b = d.left_bhat;
      right.a = d.right_ahat;
      left.right_gap = EdgeMark::gap;
      right.left_gap = EdgeMark::gap;
    } else {
      double shared = 0.5 * (v[left.last] + v[right.first]);
      left.b = shared;
      right.a = shared;
      left.right_gap = EdgeMark::none;
      right.left_gap = EdgeMark::none;
    }
  }

  Bin& lo_bin = h.bins.front();
  lo_bin.a = v[lo_bin.first] - extension(lo_bin.count());
  lo_bin.left_gap = EdgeMark::support;
  Bin& hi_bin = h.bins.back();
  hi_bin.b = v[hi_bin.last] + extension(hi_bin.count());
  hi_bin.right_gap = EdgeMark::support;

  validate(h, s.size());
  return h;
}

}  // namespace

GapDecision check_gap_boundaries(const SortedSample& s, const Bin& left, const Bin& right) {
  if (left.last + 1 != right.first)
    throw std::invalid_argument("check_gap_boundaries: bins not adjacent");
  const std::vector<double>& v = s.values;
  GapDecision d;
  d.method = "boundary-extension";
  d.left_bhat = v[left.last] + extension(left.count());
  d.right_ahat = v[right.first] - extension(right.count());
  d.is_gap = d.left_bhat < d.right_ahat;
  d.low_confidence = left.count() == 1 || right.count() == 1;
  return d;
}

GapDecision check_gap_midpoint(const SortedSample& s, const Bin& left, const Bin& right,
                               const DessBand& band) {
  if (left.last + 1 != right.first)
    throw std::invalid_argument("check_gap_midpoint: bins not adjacent");
  const std::vector<double>& v = s.values;
  double mid = 0.5 * (v[left.last] + v[right.first]);
  std::span<const double> lseg(v.data() + left.first, static_cast<std::size_t>(left.count()));
  std::span<const double> rseg(v.data() + right.first, static_cast<std::size_t>(right.count()));
  bool ok_left = dess_criterion(lseg, v[left.first], mid, band);
  bool ok_right = dess_criterion(rseg, mid, v[right.last], band);
  GapDecision d;
  d.method = "midpoint";
  d.left_bhat = mid;
  d.right_ahat = mid;
  d.is_gap = !(ok_left && ok_right);
  d.low_confidence = left.count() == 1 || right.count() == 1;
  return d;
}

GappedHistogram build_histogram(const SortedSample& s, const L0Spec& l0_spec,
                                Linkage linkage, const DessBand& band) {
  int n = static_cast<int>(s.size());
  if (n < 2) throw std::invalid_argument("build_histogram: need at least 2 values");
  const std::vector<double>& v = s.values;

  DendroTree tree = cluster(s, linkage);
  double l0 = l0_spec.resolve(tree_height(tree));

  std::vector<Block> blocks;
  if (dess_criterion(v, v.front(), v.back(), band)) {
    blocks.push_back({0, n - 1, seg_dess(v, 0, n - 1)});
    return assemble(s, std::move(blocks), l0, band, linkage);
  }

  descend_active(tree, [&](int id) {
    const DendroNode& nd = tree.nodes[id];
    double d = seg_dess(v, nd.lo, nd.hi);
    if (d < l0) {
      blocks.push_back({nd.lo, nd.hi, d});
      return Visit::stop;
    }
    for (int child : {nd.left, nd.right}) {
      if (tree.is_leaf(child))
        blocks.push_back({tree.nodes[child].lo, tree.nodes[child].lo, 0.0});
    }
    return Visit::descend;
  });

  return assemble(s, std::move(blocks), l0, band, linkage);
}

GappedHistogram refine(const GappedHistogram& h, const DendroTree& t, const SortedSample& s) {
  const std::vector<double>& v = s.values;
  auto find_node = [&](int first, int last) {
    for (int id = static_cast<int>(t.nodes.size()) - 1; id >= 0; --id) {
      if (t.nodes[id].lo == first && t.nodes[id].hi == last) return id;
    }
    throw std::invalid_argument("refine: bin has no matching tree node");
  };

  std::vector<Block> blocks;
  for (const Bin& bin : h.bins) {
    std::vector<int> stack{find_node(bin.first, bin.last)};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const DendroNode& nd = t.nodes[id];
      double d = seg_dess(v, nd.lo, nd.hi);
      if (t.is_leaf(id) || d <= h.l0) {
        blocks.push_back({nd.lo, nd.hi, d});
        continue;
      }
      double dl = seg_dess(v, t.nodes[nd.left].lo, t.nodes[nd.left].hi);
      double dr = seg_dess(v, t.nodes[nd.right].lo, t.nodes[nd.right].hi);
      if (d - dl - dr > h.l0) {
        stack.push_back(nd.right);
        stack.push_back(nd.left);
      } else {
        blocks.push_back({nd.lo, nd.hi, d});
      }
    }
  }
  return assemble(s, std::move(blocks), h.l0, h.band, h.linkage);
}

Hamiltonian hamiltonian(const GappedHistogram& h) {
  Hamiltonian out;
  out.l0 = h.l0;
  int gaps = 0;
  for (std::size_t k = 0; k + 1 < h.bins.size(); ++k) {
    if (h.bins[k].right_gap == EdgeMark::gap) ++gaps;
  }
  for (const Bin& b : h.bins) out.total_dess += b.dess;
  out.n_boundaries = static_cast<int>(h.bins.size()) - 1 + gaps;
  out.value = out.total_dess + out.l0 * static_cast<double>(out.n_boundaries);
  return out;
}

GappedHistogram brute_force_optimum(const SortedSample& s, double l0, const DessBand& band) {
  int n = static_cast<int>(s.size());
  if (n < 1 || n > 14) throw std::invalid_argument("brute_force_optimum: need 1 <= n <= 14");
  const std::vector<double>& v = s.values;

  double best_value = 0.0;
  int best_k = 0;
  std::vector<int> best_cuts;
  std::vector<Block> best_blocks;
  bool have_best = false;

  std::uint32_t masks = n == 1 ? 1u : (1u << (n - 1));
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    std::vector<int> cuts;
    for (int i = 0; i + 1 < n; ++i) {
      if (mask & (1u << i)) cuts.push_back(i);
    }
    std::vector<Block> blocks;
    int start = 0;
    for (int c : cuts) {
      blocks.push_back({start, c, seg_dess(v, start, c)});
      start = c + 1;
    }
    blocks.push_back({start, n - 1, seg_dess(v, start, n - 1)});

    double total = 0.0;
    for (const Block& b : blocks) total += b.dess;
    int gaps = 0;
    for (std::size_t k = 0; k + 1 < blocks.size(); ++k) {
      Bin lb, rb;
      lb.first = blocks[k].first;
      lb.last = blocks[k].last;
      rb.first = blocks[k + 1].first;
      rb.last = blocks[k + 1].last;
      if (check_gap_boundaries(s, lb, rb).is_gap) ++gaps;
    }
    int k = static_cast<int>(blocks.size());
    double value = total + l0 * static_cast<double>(k - 1 + gaps);

    bool better = !have_best || value < best_value ||
                  (value == best_value &&
                   (k < best_k || (k == best_k && cuts < best_cuts)));
    if (better) {
      have_best = true;
      best_value = value;
      best_k = k;
      best_cuts = cuts;
      best_blocks = blocks;
    }
  }

  return assemble(s, std::move(best_blocks), l0, band, Linkage::complete);
}

}  // namespace gh
