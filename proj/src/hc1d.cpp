#include "gh/hc1d.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <vector>

namespace gh {

namespace {

struct Run {
  int node;
  int lo;
  int hi;
};

double run_mean(const std::vector<double>& prefix, const Run& r) {
  return (prefix[r.hi + 1] - prefix[r.lo]) / static_cast<double>(r.hi - r.lo + 1);
}

double pair_distance(const std::vector<double>& v, const std::vector<double>& prefix,
                     const Run& a, const Run& b, Linkage linkage) {
  switch (linkage) {
    case Linkage::complete:
      return v[b.hi] - v[a.lo];
    case Linkage::average:
      return run_mean(prefix, b) - run_mean(prefix, a);
    case Linkage::ward: {
      double p = a.hi - a.lo + 1;
      double q = b.hi - b.lo + 1;
      double d = run_mean(prefix, b) - run_mean(prefix, a);
      return p * q / (p + q) * d * d;
    }
  }
  throw std::logic_error("bad linkage");
}

}  // namespace

DendroTree cluster(const SortedSample& s, Linkage linkage) {
  int n = static_cast<int>(s.size());
  if (n < 1) throw std::invalid_argument("cluster: empty sample");

  DendroTree t;
  t.nodes.reserve(2 * static_cast<std::size_t>(n) - 1);
  for (int i = 0; i < n; ++i) t.nodes.push_back({0.0, -1, -1, i, i});
  if (n == 1) {
    t.root = 0;
    return t;
  }

  const std::vector<double>& v = s.values;
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];

  std::vector<Run> runs;
  runs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) runs.push_back({i, i, i});

  std::vector<double> dist(static_cast<std::size_t>(n) - 1);
  for (int i = 0; i + 1 < n; ++i)
    dist[i] = pair_distance(v, prefix, runs[i], runs[i + 1], linkage);

  constexpr double kTieEta = 1e-9;
  while (runs.size() > 1) {
    std::size_t m = runs.size() - 1;
    double dmin = dist[0];
    for (std::size_t i = 1; i < m; ++i) dmin = std::min(dmin, dist[i]);
    double tol = dmin + kTieEta * std::max(dmin, 1.0);

    std::size_t pick = m;
    int pick_size = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (dist[i] > tol) continue;
      int size = runs[i + 1].hi - runs[i].lo + 1;
      if (pick == m || size < pick_size) {
        pick = i;
        pick_size = size;
      }
    }

    Run merged{static_cast<int>(t.nodes.size()), runs[pick].lo, runs[pick + 1].hi};
    t.nodes.push_back({dist[pick], runs[pick].node, runs[pick + 1].node, merged.lo, merged.hi});
    runs[pick] = merged;
    runs.erase(runs.begin() + static_cast<long>(pick) + 1);
    dist.erase(dist.begin() + static_cast<long>(pick));
    if (pick > 0)
      dist[pick - 1] = pair_distance(v, prefix, runs[pick - 1], runs[pick], linkage);
    if (pick < runs.size() - 1)
      dist[pick] = pair_distance(v, prefix, runs[pick], runs[pick + 1], linkage);
  }

  t.root = runs[0].node;
  return t;
}

double tree_height(const DendroTree& t) {
  if (t.root < 0) throw std::invalid_argument("tree_height: empty tree");
  return t.nodes[t.root].height;
}

void descend_active(const DendroTree& t, const std::function<Visit(int)>& visit) {
  if (t.root < 0 || t.is_leaf(t.root)) return;
  auto higher = [&](int a, int b) {
    const DendroNode& na = t.nodes[a];
    const DendroNode& nb = t.nodes[b];
    if (na.height != nb.height) return na.height < nb.height;
    return na.lo > nb.lo;
  };
  std::priority_queue<int, std::vector<int>, decltype(higher)> heap(higher);
  heap.push(t.root);
  while (!heap.empty()) {
    int id = heap.top();
    heap.pop();
    if (visit(id) == Visit::stop) continue;
    for (int child : {t.nodes[id].left, t.nodes[id].right}) {
      if (!t.is_leaf(child)) heap.push(child);
    }
  }
}

}  // namespace gh
