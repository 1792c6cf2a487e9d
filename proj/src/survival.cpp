#include "gh/survival.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace gh {

namespace {

struct Obs {
  double x;
  int d;
};

// Observations ordered by time with events before censored ties.
std::vector<Obs> ordered_obs(const SortedSample& s) {
  if (!s.status) throw std::invalid_argument("survival: sample has no status");
  std::vector<Obs> obs(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) obs[i] = {s.values[i], (*s.status)[i]};
  std::stable_sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.d > b.d;
  });
  return obs;
}

int value_index_at_most(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<int>(it - times.begin()) - 1;
}

int value_index_below(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  return static_cast<int>(it - times.begin()) - 1;
}

double start_value(const StepEstimate& e) { return e.kind == "survival" ? 1.0 : 0.0; }

}  // namespace

double step_value(const StepEstimate& e, double t) {
  int i = value_index_at_most(e.times, t);
  return i < 0 ? start_value(e) : e.values[static_cast<std::size_t>(i)];
}

double step_value_before(const StepEstimate& e, double t) {
  int i = value_index_below(e.times, t);
  return i < 0 ? start_value(e) : e.values[static_cast<std::size_t>(i)];
}

StepEstimate kaplan_meier(const SortedSample& s) {
  std::vector<Obs> obs = ordered_obs(s);
  std::size_t n = obs.size();
  StepEstimate e;
  e.kind = "survival";
  // Tracks n * S(t); the integer updates keep the no-censoring case exact.
  double mass = static_cast<double>(n);
  for (std::size_t i = 0; i < n;) {
    double t = obs[i].x;
    bool any_event = false;
    for (; i < n && obs[i].x == t; ++i) {
      if (obs[i].d == 1) {
        double risk = static_cast<double>(n - i);
        mass = mass * (risk - 1.0) / risk;
        any_event = true;
      }
    }
    if (any_event) {
      e.times.push_back(t);
      e.values.push_back(mass / static_cast<double>(n));
    }
  }
  return e;
}

StepEstimate nelson_aalen(const SortedSample& s) {
  std::vector<Obs> obs = ordered_obs(s);
  std::size_t n = obs.size();
  StepEstimate e;
  e.kind = "cumhaz";
  double hazard = 0.0;
  for (std::size_t i = 0; i < n;) {
    double t = obs[i].x;
    bool any_event = false;
    for (; i < n && obs[i].x == t; ++i) {
      if (obs[i].d == 1) {
        hazard += 1.0 / static_cast<double>(n - i);
        any_event = true;
      }
    }
    if (any_event) {
      e.times.push_back(t);
      e.values.push_back(hazard);
    }
  }
  return e;
}

double variance_integral(const SortedSample& s, double t_lo, double t_hi) {
  std::vector<Obs> obs = ordered_obs(s);
  std::size_t n = obs.size();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (obs[i].d != 1 || obs[i].x < t_lo || obs[i].x > t_hi) continue;
    double at_risk_next = static_cast<double>(n - i - 1);
    double at_risk = static_cast<double>(n - i);
    acc += 1.0 / (at_risk_next * at_risk);
  }
  return static_cast<double>(n) * acc;
}

CensoredHistogram censored_histogram(const SortedSample& s, const L0Spec& l0_spec,
                                     Linkage linkage, const DessBand& band) {
  if (!s.status) throw std::invalid_argument("censored_histogram: sample has no status");
  std::size_t n = s.size();

  std::vector<double> orig_values(n);
  std::vector<int> orig_status(n);
  std::vector<std::string> orig_labels;
  if (s.labels) orig_labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = static_cast<std::size_t>(s.perm[i]);
    orig_values[r] = s.values[i];
    orig_status[r] = (*s.status)[i];
    if (s.labels) orig_labels[r] = (*s.labels)[i];
  }

  std::vector<double> ev;
  std::optional<std::vector<std::string>> ev_labels;
  if (s.labels) ev_labels.emplace();
  for (std::size_t r = 0; r < n; ++r) {
    if (orig_status[r] != 1) continue;
    ev.push_back(orig_values[r]);
    if (ev_labels) ev_labels->push_back(orig_labels[r]);
  }
  if (ev.size() < 2)
    throw std::invalid_argument("censored_histogram: need at least 2 events");

  CensoredHistogram out;
  out.uncensored = sort_sample(ev, ev_labels);
  out.histogram = build_histogram(out.uncensored, l0_spec, linkage, band);
  out.km = kaplan_meier(s);
  out.masses.reserve(out.histogram.bins.size());
  for (const Bin& b : out.histogram.bins)
    out.masses.push_back(step_value_before(out.km, b.a) - step_value(out.km, b.b));
  return out;
}

Eigen::MatrixXd sigma_km(const Eigen::VectorXd& s_at_edges,
                         const Eigen::VectorXd& integrals) {
  int k = static_cast<int>(integrals.size());
  if (s_at_edges.size() != k) throw std::invalid_argument("sigma_km: size mismatch");
  Eigen::VectorXd cum(k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += integrals(i);
    cum(i) = acc;
  }
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      m(i, j) = s_at_edges(i) * s_at_edges(j) * cum(i);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

Eigen::MatrixXd sigma_na(const Eigen::VectorXd& integrals) {
  return integrals.asDiagonal();
}

std::string survival_basis_name(SurvivalBasis b) {
  return b == SurvivalBasis::km ? "km" : "na";
}

SurvivalBasis survival_basis_from_name(const std::string& s) {
  if (s == "km") return SurvivalBasis::km;
  if (s == "na") return SurvivalBasis::na;
  throw std::invalid_argument("unknown basis: " + s);
}

CensoredAuthenticity censored_authenticity(const SortedSample& s,
                                           const GappedHistogram& h, int B,
                                           std::uint64_t seed, SurvivalBasis basis) {
  if (!s.status) throw std::invalid_argument("censored_authenticity: sample has no status");
  if (!s.labels) throw std::invalid_argument("censored_authenticity: sample has no labels");
  std::size_t n = s.size();

  std::vector<double> orig_values(n);
  std::vector<int> orig_status(n);
  std::vector<std::string> orig_labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = static_cast<std::size_t>(s.perm[i]);
    orig_values[r] = s.values[i];
    orig_status[r] = (*s.status)[i];
    orig_labels[r] = (*s.labels)[i];
  }

  std::map<std::string, int> index;
  std::vector<std::string> names;
  for (const std::string& l : orig_labels) {
    if (index.emplace(l, static_cast<int>(names.size())).second) names.push_back(l);
  }

  CensoredAuthenticity out;
  out.basis = basis;

  int k_count = static_cast<int>(h.bins.size());
  std::vector<Eigen::VectorXd> rows;
  std::vector<MimicSampler> samplers;
  for (const std::string& name : names) {
    std::vector<double> tv;
    std::vector<int> td;
    for (std::size_t r = 0; r < n; ++r) {
      if (orig_labels[r] != name) continue;
      tv.push_back(orig_values[r]);
      td.push_back(orig_status[r]);
    }
    int events = std::accumulate(td.begin(), td.end(), 0);
    if (events == 0) {
      out.warnings.push_back("treatment " + name + " has no events; excluded");
      continue;
    }
    SortedSample tj = sort_sample(tv, std::nullopt, td);
    double n_j = static_cast<double>(tv.size());

    Eigen::VectorXd row(k_count);
    Eigen::VectorXd integrals(k_count);
    Eigen::VectorXd s_at_edges(k_count);
    if (basis == SurvivalBasis::km) {
      StepEstimate km = kaplan_meier(tj);
      for (int k = 0; k < k_count; ++k) {
        const Bin& b = h.bins[static_cast<std::size_t>(k)];
        row(k) = step_value_before(km, b.a) - step_value(km, b.b);
        integrals(k) = variance_integral(tj, b.a, b.b);
        s_at_edges(k) = step_value(km, b.b);
      }
      // The rows are increments, so the edge kernel gets differenced.
      Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(k_count, k_count);
      for (int k = 0; k < k_count; ++k) {
        diff(k, k) = 1.0;
        if (k > 0) diff(k, k - 1) = -1.0;
      }
      Eigen::MatrixXd cov = diff * sigma_km(s_at_edges, integrals) * diff.transpose();
      samplers.push_back(MimicSampler::from_covariance(row, cov, 2.0 * n_j));
    } else {
      StepEstimate na = nelson_aalen(tj);
      for (int k = 0; k < k_count; ++k) {
        const Bin& b = h.bins[static_cast<std::size_t>(k)];
        row(k) = step_value(na, b.b) - step_value_before(na, b.a);
        integrals(k) = variance_integral(tj, b.a, b.b);
      }
      samplers.push_back(MimicSampler::from_covariance(row, sigma_na(integrals), 2.0 * n_j));
    }
    rows.push_back(row);
    out.treatments.push_back(name);
  }

  if (rows.size() < 2)
    throw std::invalid_argument("censored_authenticity: need at least 2 treatments with events");

  Eigen::MatrixXd ref(static_cast<int>(rows.size()), k_count);
  for (std::size_t j = 0; j < rows.size(); ++j) ref.row(static_cast<int>(j)) = rows[j].transpose();
  out.report = authenticity_core(ref, samplers, B, seed);
  return out;
}

ordered_json to_json(const StepEstimate& e) {
  ordered_json j;
  j["times"] = e.times;
  j["values"] = e.values;
  j["kind"] = e.kind;
  return j;
}

}  // namespace gh
