#include "gh/anoht_tree.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "gh/parallel.hpp"

namespace gh {

namespace {

int lowest_leaf(std::uint64_t mask) { return std::countr_zero(mask); }

}  // namespace

Eigen::MatrixXd row_normalize(const TreatmentMatrix& t) {
  int j_count = t.n_treatments();
  int k_count = t.n_bins();
  if (j_count == 0 || k_count == 0) throw std::invalid_argument("row_normalize: empty matrix");
  Eigen::MatrixXd p(j_count, k_count);
  for (int j = 0; j < j_count; ++j) {
    if (t.n_j[static_cast<std::size_t>(j)] <= 0)
      throw std::invalid_argument("row_normalize: empty treatment " +
                                  t.treatment_names[static_cast<std::size_t>(j)]);
    for (int k = 0; k < k_count; ++k) {
      p(j, k) = static_cast<double>(t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]) /
                static_cast<double>(t.n_j[static_cast<std::size_t>(j)]);
    }
  }
  return p;
}

TreatmentTree treatment_tree(const Eigen::MatrixXd& p) {
  int j_count = static_cast<int>(p.rows());
  if (j_count < 1) throw std::invalid_argument("treatment_tree: no rows");
  if (j_count > 64) throw std::invalid_argument("treatment_tree: more than 64 rows");

  TreatmentTree t;
  t.n_leaves = j_count;
  t.nodes.reserve(2 * static_cast<std::size_t>(j_count) - 1);
  for (int j = 0; j < j_count; ++j) t.nodes.push_back({0.0, -1, -1, 1ULL << j});
  if (j_count == 1) {
    t.root = 0;
    return t;
  }

  std::vector<int> active(static_cast<std::size_t>(j_count));
  for (int j = 0; j < j_count; ++j) active[static_cast<std::size_t>(j)] = j;

  // Complete-linkage distances between active clusters, indexed by position.
  std::vector<std::vector<double>> dist(static_cast<std::size_t>(j_count),
                                        std::vector<double>(static_cast<std::size_t>(j_count), 0.0));
  for (int a = 0; a < j_count; ++a) {
    for (int b = a + 1; b < j_count; ++b) {
      double d = (p.row(a) - p.row(b)).norm();
      dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = d;
      dist[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = d;
    }
  }

  while (active.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best_d = dist[0][1];
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        if (dist[a][b] < best_d) {
          best_d = dist[a][b];
          best_a = a;
          best_b = b;
        }
      }
    }

    int na = active[best_a];
    int nb = active[best_b];
    int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({best_d, na, nb, t.nodes[static_cast<std::size_t>(na)].mask |
                                           t.nodes[static_cast<std::size_t>(nb)].mask});

    active[best_a] = id;
    active.erase(active.begin() + static_cast<long>(best_b));
    for (std::size_t c = 0; c < active.size(); ++c) {
      if (c == best_a) continue;
      std::size_t cc = c < best_b ? c : c + 1;
      double d = std::max(dist[best_a][cc], dist[best_b][cc]);
      dist[best_a][c] = d;
      dist[c][best_a] = d;
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = 0; b < active.size(); ++b) {
        if (a != best_a && b != best_a) {
          std::size_t aa = a < best_b ? a : a + 1;
          std::size_t bb = b < best_b ? b : b + 1;
          dist[a][b] = dist[aa][bb];
        }
      }
    }
  }

  t.root = active[0];
  return t;
}

std::vector<int> rank_digits(const TreatmentTree& t) {
  std::vector<int> internal;
  for (int id = 0; id < static_cast<int>(t.nodes.size()); ++id) {
    if (!t.is_leaf(id)) internal.push_back(id);
  }
  std::sort(internal.begin(), internal.end(), [&](int a, int b) {
    const RowNode& na = t.nodes[static_cast<std::size_t>(a)];
    const RowNode& nb = t.nodes[static_cast<std::size_t>(b)];
    if (na.height != nb.height) return na.height < nb.height;
    return lowest_leaf(na.mask) < lowest_leaf(nb.mask);
  });
  std::vector<int> digits(t.nodes.size(), 0);
  for (std::size_t r = 0; r < internal.size(); ++r)
    digits[static_cast<std::size_t>(internal[r])] = static_cast<int>(r) + 1;
  return digits;
}

Eigen::MatrixXd sigma_bridge(const Eigen::VectorXd& f) {
  int k = static_cast<int>(f.size());
  if (k < 1) throw std::invalid_argument("sigma_bridge: empty grid");
  for (int i = 0; i < k; ++i) {
    if (f(i) < 0.0 || f(i) > 1.0) throw std::invalid_argument("sigma_bridge: F outside [0, 1]");
    if (i > 0 && f(i) < f(i - 1)) throw std::invalid_argument("sigma_bridge: F not monotone");
  }
  Eigen::MatrixXd s(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      s(i, j) = f(i) * (1.0 - f(j));
      s(j, i) = s(i, j);
    }
  }
  return s;
}

Eigen::MatrixXd sigma_star(const Eigen::VectorXd& df) {
  int k = static_cast<int>(df.size());
  if (k < 1) throw std::invalid_argument("sigma_star: empty increments");
  for (int i = 0; i < k; ++i) {
    if (df(i) < 0.0) throw std::invalid_argument("sigma_star: negative increment");
  }
  Eigen::MatrixXd s = -df * df.transpose();
  s.diagonal() += df;
  return s;
}

MimicSampler MimicSampler::from_covariance(const Eigen::VectorXd& mean,
                                           const Eigen::MatrixXd& cov, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("mimic sampler: n must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw std::runtime_error("mimic sampler: eigensolver failed");
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0) / n;
  MimicSampler s;
  s.mean = mean;
  s.scale = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  s.target_sum = mean.sum();
  return s;
}

Eigen::VectorXd MimicSampler::draw(Rng& rng) const {
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
  Eigen::VectorXd x = mean + scale * z;
  x = x.cwiseMax(0.0);
  double s = x.sum();
  if (!(s > 0.0)) return mean;
  return x * (target_sum / s);
}

Eigen::VectorXd mimic_row(const Eigen::VectorXd& p, double n, std::uint64_t seed) {
  MimicSampler sampler = MimicSampler::from_covariance(p, sigma_star(p), n);
  Rng rng = Rng::stream(seed, 0);
  return sampler.draw(rng);
}

AuthenticityReport authenticity_core(const Eigen::MatrixXd& ref_rows,
                                     const std::vector<MimicSampler>& samplers,
                                     int B, std::uint64_t seed) {
  int j_count = static_cast<int>(ref_rows.rows());
  if (static_cast<int>(samplers.size()) != j_count)
    throw std::invalid_argument("authenticity: one sampler per row required");
  if (B < 1) throw std::invalid_argument("authenticity: need replicates");

  TreatmentTree ref = treatment_tree(ref_rows);
  std::vector<int> ref_digits = rank_digits(ref);

  std::vector<int> ref_internal;
  for (int id = 0; id < static_cast<int>(ref.nodes.size()); ++id) {
    if (!ref.is_leaf(id)) ref_internal.push_back(id);
  }
  std::sort(ref_internal.begin(), ref_internal.end(), [&](int a, int b) {
    return ref_digits[static_cast<std::size_t>(a)] < ref_digits[static_cast<std::size_t>(b)];
  });

  std::vector<std::uint64_t> hits(static_cast<std::size_t>(B), 0);
  parallel_for(hits.size(), [&](std::size_t b) {
    Rng rng = Rng::stream(seed, b);
    Eigen::MatrixXd m(j_count, ref_rows.cols());
    for (int j = 0; j < j_count; ++j)
      m.row(j) = samplers[static_cast<std::size_t>(j)].draw(rng).transpose();
    TreatmentTree sim = treatment_tree(m);
    std::vector<int> sim_digits = rank_digits(sim);

    std::uint64_t word = 0;
    for (std::size_t s = 0; s < ref_internal.size(); ++s) {
      std::uint64_t target = ref.nodes[static_cast<std::size_t>(ref_internal[s])].mask;
      int best = -1;
      int best_pop = j_count + 1;
      for (int id = 0; id < static_cast<int>(sim.nodes.size()); ++id) {
        if (sim.is_leaf(id)) continue;
        std::uint64_t mask = sim.nodes[static_cast<std::size_t>(id)].mask;
        if ((mask & target) != target) continue;
        int pop = std::popcount(mask);
        if (pop < best_pop) {
          best_pop = pop;
          best = id;
        }
      }
      if (best >= 0 && sim_digits[static_cast<std::size_t>(best)] <=
                           ref_digits[static_cast<std::size_t>(ref_internal[s])])
        word |= 1ULL << s;
    }
    hits[b] = word;
  });

  AuthenticityReport report;
  report.B = B;
  for (std::size_t s = 0; s < ref_internal.size(); ++s) {
    long count = 0;
    for (std::uint64_t w : hits) count += (w >> s) & 1ULL;
    AuthenticityNode node;
    std::uint64_t mask = ref.nodes[static_cast<std::size_t>(ref_internal[s])].mask;
    for (int j = 0; j < j_count; ++j) {
      if (mask & (1ULL << j)) node.leaf_set.push_back(j);
    }
    node.rank_digit = ref_digits[static_cast<std::size_t>(ref_internal[s])];
    node.index = static_cast<double>(count) / static_cast<double>(B);
    report.nodes.push_back(std::move(node));
  }
  return report;
}

AuthenticityReport authenticity(const TreatmentMatrix& t, int B, std::uint64_t seed) {
  Eigen::MatrixXd p = row_normalize(t);
  std::vector<MimicSampler> samplers;
  samplers.reserve(static_cast<std::size_t>(p.rows()));
  for (int j = 0; j < p.rows(); ++j) {
    Eigen::VectorXd row = p.row(j).transpose();
    double eff = 2.0 * static_cast<double>(t.n_j[static_cast<std::size_t>(j)]);
    samplers.push_back(MimicSampler::from_covariance(row, sigma_star(row), eff));
  }
  return authenticity_core(p, samplers, B, seed);
}

ordered_json to_json(const TreatmentTree& t) {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const RowNode& nd : t.nodes) {
    ordered_json n;
    n["height"] = nd.height;
    n["left"] = nd.left;
    n["right"] = nd.right;
    ordered_json leaves = ordered_json::array();
    for (int l = 0; l < t.n_leaves; ++l) {
      if (nd.mask & (1ULL << l)) leaves.push_back(l);
    }
    n["leaves"] = std::move(leaves);
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  j["root"] = t.root;
  return j;
}

ordered_json to_json(const AuthenticityReport& r) {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const AuthenticityNode& n : r.nodes) {
    ordered_json nj;
    nj["leaf_set"] = n.leaf_set;
    nj["rank_digit"] = n.rank_digit;
    nj["index"] = n.index;
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  j["B"] = r.B;
  return j;
}

}  // namespace gh
