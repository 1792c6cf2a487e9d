#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gh/anoht_local.hpp"
#include "gh/rng.hpp"
#include "gh/survival.hpp"

using namespace gh;

namespace {

SortedSample censored_sample(const std::vector<double>& x, const std::vector<int>& d,
                             const std::optional<std::vector<std::string>>& labels = std::nullopt) {
  return sort_sample(x, labels, d);
}

// Exponential event times against exponential censoring at the given odds.
SortedSample exp_censored(int n, double censor_odds, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 17);
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<int> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = -std::log(1.0 - rng.uniform01());
    double c = -std::log(1.0 - rng.uniform01()) / censor_odds;
    x[static_cast<std::size_t>(i)] = std::min(t, c);
    d[static_cast<std::size_t>(i)] = t <= c ? 1 : 0;
  }
  return censored_sample(x, d);
}

double second_order_bound(const SortedSample& s, double t) {
  std::vector<std::pair<double, int>> obs;
  for (std::size_t i = 0; i < s.size(); ++i)
    obs.push_back({s.values[i], (*s.status)[i]});
  std::stable_sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  });
  double acc = 0.0;
  double n = static_cast<double>(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i].first > t) break;
    if (obs[i].second == 1) {
      double risk = n - static_cast<double>(i);
      acc += 1.0 / (risk * risk);
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("kaplan_meier product limit examples") {
  StepEstimate e = kaplan_meier(censored_sample({1, 2, 3}, {1, 1, 1}));
  CHECK(e.kind == "survival");
  REQUIRE(e.times == std::vector<double>{1, 2, 3});
  CHECK(e.values[0] == doctest::Approx(2.0 / 3.0));
  CHECK(e.values[1] == doctest::Approx(1.0 / 3.0));
  CHECK(e.values[2] == 0.0);

  StepEstimate c = kaplan_meier(censored_sample({1, 2, 3}, {1, 0, 1}));
  REQUIRE(c.times == std::vector<double>{1, 3});
  CHECK(c.values[0] == doctest::Approx(2.0 / 3.0));
  CHECK(c.values[1] == 0.0);
}

TEST_CASE("step evaluators expose both one-sided limits") {
  StepEstimate e = kaplan_meier(censored_sample({1, 2, 3, 4}, {1, 0, 1, 0}));
  REQUIRE(e.times == std::vector<double>{1, 3});
  CHECK(e.values[0] == doctest::Approx(0.75));
  CHECK(e.values[1] == doctest::Approx(0.375));

  CHECK(step_value(e, 0.5) == 1.0);
  CHECK(step_value(e, 1.0) == doctest::Approx(0.75));
  CHECK(step_value(e, 2.9) == doctest::Approx(0.75));
  CHECK(step_value(e, 3.0) == doctest::Approx(0.375));
  CHECK(step_value(e, 100.0) == doctest::Approx(0.375));
  CHECK(step_value_before(e, 1.0) == 1.0);
  CHECK(step_value_before(e, 3.0) == doctest::Approx(0.75));
  CHECK(step_value_before(e, 100.0) == doctest::Approx(0.375));
}

TEST_CASE("nelson_aalen cumulative hazard examples") {
  StepEstimate e = nelson_aalen(censored_sample({1, 2, 3}, {1, 1, 1}));
  CHECK(e.kind == "cumhaz");
  REQUIRE(e.times == std::vector<double>{1, 2, 3});
  CHECK(e.values[0] == doctest::Approx(1.0 / 3.0));
  CHECK(e.values[1] == doctest::Approx(5.0 / 6.0));
  CHECK(e.values[2] == doctest::Approx(11.0 / 6.0));

  StepEstimate z = nelson_aalen(censored_sample({1, 2, 3}, {0, 0, 0}));
  CHECK(z.times.empty());
  CHECK(step_value(z, 10.0) == 0.0);
  CHECK(step_value_before(z, 1.0) == 0.0);
}

TEST_CASE("tied event and censoring put the event first") {
  StepEstimate e = kaplan_meier(censored_sample({2, 2}, {0, 1}));
  REQUIRE(e.times == std::vector<double>{2});
  CHECK(e.values[0] == doctest::Approx(0.5));
  StepEstimate na = nelson_aalen(censored_sample({2, 2}, {0, 1}));
  CHECK(na.values[0] == doctest::Approx(0.5));

  StepEstimate both = kaplan_meier(censored_sample({2, 2}, {1, 1}));
  REQUIRE(both.times == std::vector<double>{2});
  CHECK(both.values[0] == 0.0);
}

TEST_CASE("survival estimators require status") {
  SortedSample s = sort_sample({1.0, 2.0});
  CHECK_THROWS_AS(kaplan_meier(s), std::invalid_argument);
  CHECK_THROWS_AS(nelson_aalen(s), std::invalid_argument);
  CHECK_THROWS_AS(variance_integral(s, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("kaplan_meier without censoring is exactly one minus the ecdf") {
  int n = 1000;
  Rng rng(606);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.uniform01();
  std::vector<int> d(static_cast<std::size_t>(n), 1);
  StepEstimate e = kaplan_meier(censored_sample(x, d));
  REQUIRE(static_cast<int>(e.times.size()) == n);
  for (int i = 0; i < n; ++i) {
    double ecdf_complement = static_cast<double>(n - i - 1) / static_cast<double>(n);
    CHECK(e.values[static_cast<std::size_t>(i)] == ecdf_complement);
  }
}

TEST_CASE("monotonicity invariants on random censored data") {
  for (int seed = 0; seed < 20; ++seed) {
    SortedSample s = exp_censored(200, 0.4 + 0.1 * (seed % 15), 7000 + seed);
    StepEstimate km = kaplan_meier(s);
    StepEstimate na = nelson_aalen(s);
    for (std::size_t i = 0; i < km.values.size(); ++i) {
      CHECK(km.values[i] >= 0.0);
      CHECK(km.values[i] <= 1.0);
      if (i > 0) CHECK(km.values[i] <= km.values[i - 1]);
    }
    for (std::size_t i = 1; i < na.values.size(); ++i)
      CHECK(na.values[i] >= na.values[i - 1]);
  }
}

TEST_CASE("cumulative hazard stays within the second-order bound of -log km") {
  for (int seed = 0; seed < 20; ++seed) {
    SortedSample s = exp_censored(200, 0.45 + 0.08 * (seed % 20), 8100 + seed);
    StepEstimate km = kaplan_meier(s);
    StepEstimate na = nelson_aalen(s);
    for (std::size_t i = 0; i < na.times.size(); ++i) {
      double t = na.times[i];
      double surv = step_value(km, t);
      if (!(surv > 0.0)) continue;
      double gap = na.values[i] + std::log(surv);
      CHECK(gap <= 0.0 + 1e-12);
      CHECK(-gap <= second_order_bound(s, t) + 1e-12);
    }
  }
}

TEST_CASE("variance_integral formula and guards") {
  SortedSample two = censored_sample({1, 2}, {1, 1});
  CHECK(variance_integral(two, 0.5, 1.5) == doctest::Approx(1.0));
  CHECK(variance_integral(two, 0.0, 3.0) == doctest::Approx(1.0));  // last rank skipped
  CHECK(variance_integral(two, 1.5, 3.0) == 0.0);
  CHECK(variance_integral(censored_sample({1, 2}, {0, 1}), 0.0, 3.0) == 0.0);
  CHECK(variance_integral(two, 5.0, 9.0) == 0.0);
}

TEST_CASE("variance_integral telescopes without censoring") {
  int n = 100;
  Rng rng(13);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.uniform01();
  std::vector<int> d(static_cast<std::size_t>(n), 1);
  SortedSample s = censored_sample(x, d);
  double full = variance_integral(s, 0.0, 1.0);
  CHECK(full == doctest::Approx(static_cast<double>(n - 1)).epsilon(1e-12));

  std::vector<double> sorted = s.values;
  double expect = 0.0;
  for (int i = 1; i <= n - 1; ++i)
    expect += 1.0 / (static_cast<double>(n - i) * static_cast<double>(n - i + 1));
  CHECK(full == doctest::Approx(static_cast<double>(n) * expect));
}

TEST_CASE("censored_histogram redistributes mass by the km curve") {
  Rng rng(31);
  std::vector<double> x;
  std::vector<int> d;
  for (int i = 0; i < 80; ++i) {
    x.push_back(rng.uniform01());
    d.push_back(1);
  }
  for (int i = 0; i < 80; ++i) {
    x.push_back(4.0 + rng.uniform01());
    d.push_back(1);
  }
  for (int i = 0; i < 120; ++i) {
    x.push_back(6.0 * rng.uniform01());
    d.push_back(0);
  }
  SortedSample s = censored_sample(x, d);
  DessBand band = calibrate_band(160, 0.05, 2000, 777);

  CensoredHistogram ch = censored_histogram(s, L0Spec{}, Linkage::complete, band);
  CHECK(ch.uncensored.size() == 160);
  REQUIRE(ch.masses.size() == ch.histogram.bins.size());
  double total = 0.0;
  for (double m : ch.masses) {
    CHECK(m >= 0.0);
    total += m;
  }
  double last_edge = ch.histogram.bins.back().b;
  CHECK(total == doctest::Approx(1.0 - step_value(ch.km, last_edge)).epsilon(1e-12));
  CHECK(total < 1.0);  // censored observations beyond the last edge hold mass back
}

TEST_CASE("censored_histogram without censoring gives empirical proportions") {
  Rng rng(77);
  std::vector<double> x;
  std::vector<int> d;
  for (int i = 0; i < 40; ++i) {
    x.push_back(rng.uniform01());
    d.push_back(1);
  }
  for (int i = 0; i < 40; ++i) {
    x.push_back(3.0 + rng.uniform01());
    d.push_back(1);
  }
  SortedSample s = censored_sample(x, d);
  DessBand band = calibrate_band(80, 0.05, 2000, 777);
  CensoredHistogram ch = censored_histogram(s, L0Spec{}, Linkage::complete, band);
  for (std::size_t k = 0; k < ch.masses.size(); ++k) {
    const Bin& b = ch.histogram.bins[k];
    double prop = static_cast<double>(b.count()) / 80.0;
    CHECK(ch.masses[k] == doctest::Approx(prop).epsilon(1e-12));
  }
}

TEST_CASE("one tight event cluster keeps a single bin holding all km mass") {
  Rng rng(91);
  std::vector<double> x;
  std::vector<int> d;
  for (int i = 0; i < 50; ++i) {
    x.push_back(2.0 + 0.5 * rng.uniform01());
    d.push_back(1);
  }
  for (int i = 0; i < 50; ++i) {
    x.push_back(10.0 * rng.uniform01());
    d.push_back(0);
  }
  SortedSample s = censored_sample(x, d);
  DessBand band = calibrate_band(50, 0.05, 2000, 777);
  CensoredHistogram ch = censored_histogram(s, L0Spec{}, Linkage::complete, band);
  REQUIRE(ch.histogram.bins.size() == 1);
  CHECK(ch.masses[0] ==
        doctest::Approx(1.0 - step_value(ch.km, ch.histogram.bins[0].b)).epsilon(1e-12));
}

TEST_CASE("censored_histogram input guards") {
  CHECK_THROWS_AS(censored_histogram(sort_sample({1.0, 2.0}), L0Spec{}, Linkage::complete,
                                     DessBand{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(censored_histogram(censored_sample({1, 2, 3}, {1, 0, 0}), L0Spec{},
                                     Linkage::complete, DessBand{}),
                  std::invalid_argument);
}

TEST_CASE("sigma_km and sigma_na shapes") {
  Eigen::VectorXd s1(1), i1(1);
  s1 << 0.8;
  i1 << 0.5;
  Eigen::MatrixXd k1 = sigma_km(s1, i1);
  CHECK(k1(0, 0) == doctest::Approx(0.8 * 0.8 * 0.5));

  Eigen::VectorXd s3(3), i3(3);
  s3 << 0.9, 0.6, 0.2;
  i3 << 0.1, 0.2, 0.3;
  Eigen::MatrixXd k3 = sigma_km(s3, i3);
  CHECK(k3(0, 0) == doctest::Approx(0.9 * 0.9 * 0.1));
  CHECK(k3(0, 2) == doctest::Approx(0.9 * 0.2 * 0.1));
  CHECK(k3(2, 0) == doctest::Approx(k3(0, 2)));
  CHECK(k3(1, 2) == doctest::Approx(0.6 * 0.2 * 0.3));
  CHECK(k3(2, 2) == doctest::Approx(0.2 * 0.2 * 0.6));

  Eigen::MatrixXd n3 = sigma_na(i3);
  CHECK(n3(0, 0) == 0.1);
  CHECK(n3(1, 1) == 0.2);
  CHECK(n3(0, 1) == 0.0);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK(sigma_km(s3, zero).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd s2(2);
  s2 << 0.5, 0.4;
  CHECK_THROWS_AS(sigma_km(s2, i3), std::invalid_argument);
}

TEST_CASE("sigma_km without censoring recovers the brownian bridge kernel") {
  int n = 2000;
  Rng rng(414);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.uniform01();
  std::vector<int> d(static_cast<std::size_t>(n), 1);
  SortedSample s = censored_sample(x, d);
  StepEstimate km = kaplan_meier(s);

  std::vector<double> edges;
  for (int q = 1; q <= 4; ++q) {
    int i = q * n / 5;
    edges.push_back(0.5 * (s.values[static_cast<std::size_t>(i - 1)] +
                           s.values[static_cast<std::size_t>(i)]));
  }
  int k = static_cast<int>(edges.size());
  Eigen::VectorXd s_at(k), integrals(k), f(k);
  double prev = s.values.front() - 1.0;
  for (int i = 0; i < k; ++i) {
    s_at(i) = step_value(km, edges[static_cast<std::size_t>(i)]);
    integrals(i) = variance_integral(s, prev, edges[static_cast<std::size_t>(i)]);
    f(i) = 1.0 - s_at(i);
    prev = edges[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd got = sigma_km(s_at, integrals);
  Eigen::MatrixXd want = sigma_bridge(f);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j)
      CHECK(std::abs(got(i, j) - want(i, j)) <= 0.02 * std::abs(want(i, j)) + 1e-9);
  }
}

TEST_CASE("censored authenticity matches the uncensored engine when nothing is censored") {
  Rng rng(55);
  std::vector<double> x;
  std::vector<int> d;
  std::vector<std::string> labels;
  auto add_group = [&](const std::string& name, double center, double spread, int count) {
    for (int i = 0; i < count; ++i) {
      x.push_back(center + spread * rng.uniform01());
      d.push_back(1);
      labels.push_back(name);
    }
  };
  add_group("g1", 0.0, 1.0, 60);
  add_group("g2", 0.4, 1.2, 60);
  add_group("g3", 4.0, 1.0, 60);
  SortedSample s = censored_sample(x, d, labels);
  DessBand band = calibrate_band(180, 0.05, 2000, 777);
  CensoredHistogram ch = censored_histogram(s, L0Spec{}, Linkage::complete, band);

  CensoredAuthenticity ca = censored_authenticity(s, ch.histogram, 1000, 12, SurvivalBasis::km);
  TreatmentMatrix t = bin_compositions(ch.histogram, ch.uncensored);
  AuthenticityReport plain = authenticity(t, 1000, 12);

  CHECK(ca.warnings.empty());
  CHECK(ca.treatments == std::vector<std::string>{"g1", "g2", "g3"});
  REQUIRE(ca.report.nodes.size() == plain.nodes.size());
  for (std::size_t i = 0; i < plain.nodes.size(); ++i) {
    CHECK(ca.report.nodes[i].leaf_set == plain.nodes[i].leaf_set);
    CHECK(std::abs(ca.report.nodes[i].index - plain.nodes[i].index) <= 0.02);
  }
}

TEST_CASE("censored authenticity excludes event-free treatments with a warning") {
  Rng rng(66);
  std::vector<double> x;
  std::vector<int> d;
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) {
    x.push_back(rng.uniform01());
    d.push_back(1);
    labels.push_back("a");
  }
  for (int i = 0; i < 40; ++i) {
    x.push_back(2.0 + rng.uniform01());
    d.push_back(1);
    labels.push_back("b");
  }
  for (int i = 0; i < 40; ++i) {
    x.push_back(1.0 + rng.uniform01());
    d.push_back(i % 2);
    labels.push_back("c");
  }
  for (int i = 0; i < 10; ++i) {
    x.push_back(3.0 * rng.uniform01());
    d.push_back(0);
    labels.push_back("z");
  }
  SortedSample s = censored_sample(x, d, labels);
  DessBand band = calibrate_band(100, 0.05, 2000, 777);
  CensoredHistogram ch = censored_histogram(s, L0Spec{}, Linkage::complete, band);

  for (SurvivalBasis basis : {SurvivalBasis::km, SurvivalBasis::na}) {
    CensoredAuthenticity ca = censored_authenticity(s, ch.histogram, 400, 3, basis);
    CHECK(ca.basis == basis);
    CHECK(ca.treatments == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(ca.warnings.size() == 1);
    CHECK(ca.warnings[0].find("z") != std::string::npos);
    REQUIRE(ca.report.nodes.size() == 2);
    CHECK(ca.report.nodes.back().index == 1.0);
    for (const AuthenticityNode& nd : ca.report.nodes) {
      CHECK(nd.index >= 0.0);
      CHECK(nd.index <= 1.0);
    }
  }
}

TEST_CASE("censored authenticity needs two treatments with events") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<int> d{1, 1, 1, 0, 0, 0};
  std::vector<std::string> labels{"a", "a", "a", "z", "z", "z"};
  SortedSample s = censored_sample(x, d, labels);
  DessBand band;
  band.lo = 0.0;
  band.hi = 1e9;
  CensoredHistogram ch = censored_histogram(s, L0Spec{}, Linkage::complete, band);
  CHECK_THROWS_AS(censored_authenticity(s, ch.histogram, 100, 1, SurvivalBasis::km),
                  std::invalid_argument);
}

TEST_CASE("basis names round trip") {
  CHECK(survival_basis_name(SurvivalBasis::km) == "km");
  CHECK(survival_basis_name(SurvivalBasis::na) == "na");
  CHECK(survival_basis_from_name("km") == SurvivalBasis::km);
  CHECK(survival_basis_from_name("na") == SurvivalBasis::na);
  CHECK_THROWS_AS(survival_basis_from_name("other"), std::invalid_argument);
}

TEST_CASE("step estimate json carries its kind") {
  StepEstimate e = kaplan_meier(censored_sample({1, 2}, {1, 1}));
  ordered_json j = to_json(e);
  CHECK(j["kind"] == "survival");
  CHECK(j["times"].size() == 2);
  CHECK(j["values"][0] == 0.5);
}
