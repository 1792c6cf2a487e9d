#include "gh/anoht_local.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "gh/parallel.hpp"
#include "gh/rng.hpp"

namespace gh {

namespace {

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double column_ratio(const std::vector<int>& column, double base_entropy) {
  int total = std::accumulate(column.begin(), column.end(), 0);
  if (total == 0) return 1.0;
  std::vector<double> p(column.size());
  for (std::size_t j = 0; j < column.size(); ++j)
    p[j] = static_cast<double>(column[j]) / static_cast<double>(total);
  return entropy(p) / base_entropy;
}

struct Base {
  double ent = 0.0;
  bool degenerate = true;
};

Base base_of(const std::vector<int>& n_j) {
  Base b;
  int n = std::accumulate(n_j.begin(), n_j.end(), 0);
  if (n_j.size() < 2 || n == 0) return b;
  std::vector<double> props(n_j.size());
  for (std::size_t j = 0; j < n_j.size(); ++j)
    props[j] = static_cast<double>(n_j[j]) / static_cast<double>(n);
  b.ent = entropy(props);
  b.degenerate = !(b.ent > 0.0);
  return b;
}

// Draws `want` labels without replacement from the pool described by
// `left` (counts per treatment, modified in place).
void draw_without_replacement(Rng& rng, std::vector<int>& left, int& total_left,
                              int want, std::vector<int>& out) {
  std::fill(out.begin(), out.end(), 0);
  for (int d = 0; d < want; ++d) {
    std::uint64_t x = rng.below(static_cast<std::uint64_t>(total_left));
    for (std::size_t j = 0; j < left.size(); ++j) {
      if (x < static_cast<std::uint64_t>(left[j])) {
        ++out[j];
        --left[j];
        --total_left;
        break;
      }
      x -= static_cast<std::uint64_t>(left[j]);
    }
  }
}

}  // namespace

TreatmentMatrix bin_compositions(const GappedHistogram& h, const SortedSample& s) {
  if (!s.labels) throw std::invalid_argument("bin_compositions: sample has no labels");
  const std::vector<std::string>& labels = *s.labels;
  std::size_t n = s.size();

  std::vector<std::string> orig(n);
  for (std::size_t i = 0; i < n; ++i) orig[static_cast<std::size_t>(s.perm[i])] = labels[i];
  std::map<std::string, int> index;
  std::vector<std::string> names;
  for (const std::string& l : orig) {
    if (index.emplace(l, static_cast<int>(names.size())).second) names.push_back(l);
  }

  int j_count = static_cast<int>(names.size());
  int k_count = static_cast<int>(h.bins.size());
  TreatmentMatrix t;
  t.treatment_names = names;
  t.counts.assign(static_cast<std::size_t>(j_count), std::vector<int>(static_cast<std::size_t>(k_count), 0));
  t.n_j.assign(static_cast<std::size_t>(j_count), 0);

  for (int k = 0; k < k_count; ++k) {
    const Bin& b = h.bins[static_cast<std::size_t>(k)];
    for (int i = b.first; i <= b.last; ++i) {
      int j = index.at(labels[static_cast<std::size_t>(i)]);
      ++t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      ++t.n_j[static_cast<std::size_t>(j)];
    }
  }

  t.edges.resize(static_cast<std::size_t>(k_count) + 1);
  t.edges[0] = h.bins.front().a;
  for (int k = 1; k < k_count; ++k) {
    const Bin& prev = h.bins[static_cast<std::size_t>(k - 1)];
    const Bin& next = h.bins[static_cast<std::size_t>(k)];
    t.edges[static_cast<std::size_t>(k)] = prev.b == next.a ? prev.b : 0.5 * (prev.b + next.a);
  }
  t.edges[static_cast<std::size_t>(k_count)] = h.bins.back().b;
  return t;
}

double entropy_ratio(const std::vector<int>& column, const std::vector<int>& n_j) {
  if (column.size() != n_j.size())
    throw std::invalid_argument("entropy_ratio: size mismatch");
  Base base = base_of(n_j);
  if (base.degenerate) return 1.0;
  return column_ratio(column, base.ent);
}

double entropy_ratio_weighted(const std::vector<double>& column,
                              const std::vector<double>& base) {
  if (column.size() != base.size())
    throw std::invalid_argument("entropy_ratio_weighted: size mismatch");
  double base_total = std::accumulate(base.begin(), base.end(), 0.0);
  if (base.size() < 2 || !(base_total > 0.0)) return 1.0;
  std::vector<double> q(base.size());
  for (std::size_t j = 0; j < base.size(); ++j) q[j] = base[j] / base_total;
  double base_ent = entropy(q);
  if (!(base_ent > 0.0)) return 1.0;
  double total = std::accumulate(column.begin(), column.end(), 0.0);
  if (!(total > 0.0)) return 1.0;
  std::vector<double> p(column.size());
  for (std::size_t j = 0; j < column.size(); ++j) p[j] = column[j] / total;
  return entropy(p) / base_ent;
}

double bin_pvalue(const TreatmentMatrix& t, int bin_index, int n_permutations,
                  std::uint64_t seed) {
  if (bin_index < 0 || bin_index >= t.n_bins())
    throw std::invalid_argument("bin_pvalue: bad bin index");
  if (n_permutations < 1) throw std::invalid_argument("bin_pvalue: need permutations");
  Base base = base_of(t.n_j);
  if (base.degenerate) return 1.0;

  int j_count = t.n_treatments();
  std::vector<int> column(static_cast<std::size_t>(j_count));
  for (int j = 0; j < j_count; ++j)
    column[static_cast<std::size_t>(j)] = t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(bin_index)];
  double obs = column_ratio(column, base.ent);
  int want = std::accumulate(column.begin(), column.end(), 0);
  int n = std::accumulate(t.n_j.begin(), t.n_j.end(), 0);

  std::vector<char> hit(static_cast<std::size_t>(n_permutations), 0);
  parallel_for(hit.size(), [&](std::size_t r) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(bin_index) + 1, r);
    std::vector<int> left = t.n_j;
    int total_left = n;
    std::vector<int> sim(static_cast<std::size_t>(j_count));
    draw_without_replacement(rng, left, total_left, want, sim);
    if (column_ratio(sim, base.ent) <= obs) hit[r] = 1;
  });
  long count = 0;
  for (char c : hit) count += c;
  return (1.0 + static_cast<double>(count)) / (static_cast<double>(n_permutations) + 1.0);
}

GlobalTest global_test(const TreatmentMatrix& t, int n_permutations, std::uint64_t seed) {
  if (n_permutations < 1) throw std::invalid_argument("global_test: need permutations");
  GlobalTest out;
  Base base = base_of(t.n_j);
  if (base.degenerate) {
    out.weighted_entropy = 1.0;
    out.p_value = 1.0;
    return out;
  }

  int j_count = t.n_treatments();
  int k_count = t.n_bins();
  int n = std::accumulate(t.n_j.begin(), t.n_j.end(), 0);
  std::vector<int> col_sums(static_cast<std::size_t>(k_count), 0);
  for (int k = 0; k < k_count; ++k) {
    for (int j = 0; j < j_count; ++j)
      col_sums[static_cast<std::size_t>(k)] += t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  }

  auto weighted = [&](const std::vector<std::vector<int>>& cols) {
    double acc = 0.0;
    for (int k = 0; k < k_count; ++k) {
      double w = static_cast<double>(col_sums[static_cast<std::size_t>(k)]) / static_cast<double>(n);
      acc += w * column_ratio(cols[static_cast<std::size_t>(k)], base.ent);
    }
    return acc;
  };

  std::vector<std::vector<int>> obs_cols(static_cast<std::size_t>(k_count),
                                         std::vector<int>(static_cast<std::size_t>(j_count)));
  for (int k = 0; k < k_count; ++k) {
    for (int j = 0; j < j_count; ++j)
      obs_cols[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
          t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  }
  out.weighted_entropy = weighted(obs_cols);

  std::vector<char> hit(static_cast<std::size_t>(n_permutations), 0);
  parallel_for(hit.size(), [&](std::size_t r) {
    Rng rng = Rng::stream(seed, 0, r);
    std::vector<int> left = t.n_j;
    int total_left = n;
    std::vector<std::vector<int>> cols(static_cast<std::size_t>(k_count),
                                       std::vector<int>(static_cast<std::size_t>(j_count)));
    for (int k = 0; k < k_count; ++k) {
      draw_without_replacement(rng, left, total_left, col_sums[static_cast<std::size_t>(k)],
                               cols[static_cast<std::size_t>(k)]);
    }
    if (weighted(cols) <= out.weighted_entropy) hit[r] = 1;
  });
  long count = 0;
  for (char c : hit) count += c;
  out.p_value = (1.0 + static_cast<double>(count)) / (static_cast<double>(n_permutations) + 1.0);
  return out;
}

ordered_json to_json(const BinComparison& c) {
  ordered_json j;
  j["bin_index"] = c.bin_index;
  j["counts"] = c.counts;
  j["entropy_ratio"] = c.entropy_ratio;
  j["p_value"] = c.p_value;
  return j;
}

ordered_json to_json(const GlobalTest& g) {
  ordered_json j;
  j["weighted_entropy"] = g.weighted_entropy;
  j["p_value"] = g.p_value;
  return j;
}

}  // namespace gh
