#include "gh/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gh {

std::string linkage_name(Linkage k) {
  switch (k) {
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    case Linkage::ward: return "ward";
  }
  throw std::logic_error("bad linkage");
}

Linkage linkage_from_name(const std::string& s) {
  if (s == "complete") return Linkage::complete;
  if (s == "average") return Linkage::average;
  if (s == "ward") return Linkage::ward;
  throw std::invalid_argument("unknown linkage: " + s);
}

std::string edge_mark_name(EdgeMark m) {
  switch (m) {
    case EdgeMark::none: return "none";
    case EdgeMark::gap: return "gap";
    case EdgeMark::support: return "boundary-of-support";
  }
  throw std::logic_error("bad edge mark");
}

EdgeMark edge_mark_from_name(const std::string& s) {
  if (s == "none") return EdgeMark::none;
  if (s == "gap") return EdgeMark::gap;
  if (s == "boundary-of-support") return EdgeMark::support;
  throw std::invalid_argument("unknown edge mark: " + s);
}

SortedSample sort_sample(const std::vector<double>& values,
                         const std::optional<std::vector<std::string>>& labels,
                         const std::optional<std::vector<int>>& status) {
  if (values.empty()) throw std::invalid_argument("sort_sample: empty sample");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("sort_sample: non-finite value");
  }
  if (labels && labels->size() != values.size())
    throw std::invalid_argument("sort_sample: labels length mismatch");
  if (status && status->size() != values.size())
    throw std::invalid_argument("sort_sample: status length mismatch");
  if (status) {
    for (int d : *status) {
      if (d != 0 && d != 1) throw std::invalid_argument("sort_sample: status must be 0 or 1");
    }
  }

  std::vector<int> perm(values.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int i, int j) { return values[i] < values[j]; });

  SortedSample out;
  out.perm = perm;
  out.values.reserve(values.size());
  for (int i : perm) out.values.push_back(values[i]);
  if (labels) {
    std::vector<std::string> l;
    l.reserve(values.size());
    for (int i : perm) l.push_back((*labels)[i]);
    out.labels = std::move(l);
  }
  if (status) {
    std::vector<int> d;
    d.reserve(values.size());
    for (int i : perm) d.push_back((*status)[i]);
    out.status = std::move(d);
  }
  return out;
}

Standardized standardize(const SortedSample& s) {
  std::size_t n = s.size();
  if (n < 2) throw std::invalid_argument("standardize: need at least 2 values");
  double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : s.values) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("standardize: degenerate scale");
  Standardized out;
  out.sample = s;
  for (double& v : out.sample.values) v = (v - mean) / sd;
  out.mean = mean;
  out.sd = sd;
  return out;
}

void validate(const GappedHistogram& h, std::size_t n) {
  if (h.bins.empty()) throw std::invalid_argument("histogram: no bins");
  int expect = 0;
  for (std::size_t k = 0; k < h.bins.size(); ++k) {
    const Bin& b = h.bins[k];
    if (b.first != expect) throw std::invalid_argument("histogram: bins do not tile the sample");
    if (b.last < b.first) throw std::invalid_argument("histogram: empty bin");
    if (!(b.a <= b.b)) throw std::invalid_argument("histogram: a > b");
    if (!(b.dess >= 0.0)) throw std::invalid_argument("histogram: negative dess");
    expect = b.last + 1;
    if (k > 0) {
      const Bin& prev = h.bins[k - 1];
      if (!(prev.b <= b.a)) throw std::invalid_argument("histogram: bins overlap");
      if (prev.right_gap != b.left_gap)
        throw std::invalid_argument("histogram: junction marks disagree");
      if (b.left_gap == EdgeMark::support)
        throw std::invalid_argument("histogram: interior support mark");
    }
  }
  if (expect != static_cast<int>(n))
    throw std::invalid_argument("histogram: bins do not cover the sample");
  if (h.bins.front().left_gap != EdgeMark::support ||
      h.bins.back().right_gap != EdgeMark::support)
    throw std::invalid_argument("histogram: outer edges must be boundary-of-support");
}

ordered_json to_json(const SortedSample& s) {
  ordered_json j;
  j["values"] = s.values;
  j["perm"] = s.perm;
  if (s.labels) j["labels"] = *s.labels;
  if (s.status) j["status"] = *s.status;
  return j;
}

SortedSample sorted_sample_from_json(const ordered_json& j) {
  SortedSample s;
  s.values = j.at("values").get<std::vector<double>>();
  s.perm = j.at("perm").get<std::vector<int>>();
  if (j.contains("labels")) s.labels = j.at("labels").get<std::vector<std::string>>();
  if (j.contains("status")) s.status = j.at("status").get<std::vector<int>>();
  return s;
}

ordered_json to_json(const Bin& b) {
  ordered_json j;
  j["a"] = b.a;
  j["b"] = b.b;
  j["members"] = {b.first, b.last};
  j["dess"] = b.dess;
  j["left_gap"] = edge_mark_name(b.left_gap);
  j["right_gap"] = edge_mark_name(b.right_gap);
  return j;
}

Bin bin_from_json(const ordered_json& j) {
  Bin b;
  b.a = j.at("a").get<double>();
  b.b = j.at("b").get<double>();
  b.first = j.at("members").at(0).get<int>();
  b.last = j.at("members").at(1).get<int>();
  b.dess = j.at("dess").get<double>();
  b.left_gap = edge_mark_from_name(j.at("left_gap").get<std::string>());
  b.right_gap = edge_mark_from_name(j.at("right_gap").get<std::string>());
  return b;
}

ordered_json to_json(const DessBand& b) {
  ordered_json j;
  j["lo"] = b.lo;
  j["hi"] = b.hi;
  j["alpha"] = b.alpha;
  j["n_calibration"] = b.n_calibration;
  j["m_replicates"] = b.m_replicates;
  return j;
}

DessBand band_from_json(const ordered_json& j) {
  DessBand b;
  b.lo = j.at("lo").get<double>();
  b.hi = j.at("hi").get<double>();
  b.alpha = j.at("alpha").get<double>();
  b.n_calibration = j.at("n_calibration").get<int>();
  b.m_replicates = j.at("m_replicates").get<int>();
  return b;
}

ordered_json to_json(const GappedHistogram& h) {
  ordered_json j;
  ordered_json bins = ordered_json::array();
  for (const Bin& b : h.bins) bins.push_back(to_json(b));
  j["bins"] = std::move(bins);
  j["l0"] = h.l0;
  j["band"] = to_json(h.band);
  j["linkage"] = linkage_name(h.linkage);
  return j;
}

GappedHistogram histogram_from_json(const ordered_json& j) {
  GappedHistogram h;
  for (const auto& bj : j.at("bins")) h.bins.push_back(bin_from_json(bj));
  h.l0 = j.at("l0").get<double>();
  h.band = band_from_json(j.at("band"));
  h.linkage = linkage_from_name(j.at("linkage").get<std::string>());
  return h;
}

ordered_json to_json(const GapDecision& d) {
  ordered_json j;
  j["method"] = d.method;
  j["is_gap"] = d.is_gap;
  j["left_bhat"] = d.left_bhat;
  j["right_ahat"] = d.right_ahat;
  j["low_confidence"] = d.low_confidence;
  return j;
}

GapDecision gap_decision_from_json(const ordered_json& j) {
  GapDecision d;
  d.method = j.at("method").get<std::string>();
  d.is_gap = j.at("is_gap").get<bool>();
  d.left_bhat = j.at("left_bhat").get<double>();
  d.right_ahat = j.at("right_ahat").get<double>();
  d.low_confidence = j.at("low_confidence").get<bool>();
  return d;
}

ordered_json to_json(const Hamiltonian& h) {
  ordered_json j;
  j["total_dess"] = h.total_dess;
  j["n_boundaries"] = h.n_boundaries;
  j["l0"] = h.l0;
  j["value"] = h.value;
  return j;
}

Hamiltonian hamiltonian_from_json(const ordered_json& j) {
  Hamiltonian h;
  h.total_dess = j.at("total_dess").get<double>();
  h.n_boundaries = j.at("n_boundaries").get<int>();
  h.l0 = j.at("l0").get<double>();
  h.value = j.at("value").get<double>();
  return h;
}

ordered_json to_json(const DendroTree& t) {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const DendroNode& nd : t.nodes) {
    ordered_json n;
    n["height"] = nd.height;
    n["left"] = nd.left;
    n["right"] = nd.right;
    n["leaves"] = {nd.lo, nd.hi};
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  j["root"] = t.root;
  return j;
}

DendroTree dendro_tree_from_json(const ordered_json& j) {
  DendroTree t;
  for (const auto& nj : j.at("nodes")) {
    DendroNode n;
    n.height = nj.at("height").get<double>();
    n.left = nj.at("left").get<int>();
    n.right = nj.at("right").get<int>();
    n.lo = nj.at("leaves").at(0).get<int>();
    n.hi = nj.at("leaves").at(1).get<int>();
    t.nodes.push_back(n);
  }
  t.root = j.at("root").get<int>();
  return t;
}

ordered_json to_json(const TreatmentMatrix& t) {
  ordered_json j;
  j["counts"] = t.counts;
  j["treatment_names"] = t.treatment_names;
  j["n_j"] = t.n_j;
  j["edges"] = t.edges;
  return j;
}

TreatmentMatrix treatment_matrix_from_json(const ordered_json& j) {
  TreatmentMatrix t;
  t.counts = j.at("counts").get<std::vector<std::vector<int>>>();
  t.treatment_names = j.at("treatment_names").get<std::vector<std::string>>();
  t.n_j = j.at("n_j").get<std::vector<int>>();
  t.edges = j.at("edges").get<std::vector<double>>();
  return t;
}

}  // namespace gh
