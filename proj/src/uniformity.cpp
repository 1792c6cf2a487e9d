#include "gh/uniformity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gh/parallel.hpp"
#include "gh/rng.hpp"

namespace gh {

double order_stat_mean(int k, int n) {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("order_stat_mean: bad k or n");
  return static_cast<double>(k) / static_cast<double>(n + 1);
}

double total_order_stat_variance(int n) {
  if (n < 1) throw std::invalid_argument("total_order_stat_variance: n < 1");
  return static_cast<double>(n) / (6.0 * static_cast<double>(n + 1));
}

double dess(std::span<const double> v, double a, double b) {
  std::size_t m = v.size();
  if (m == 0) throw std::invalid_argument("dess: empty input");
  if (!(a <= b)) throw std::invalid_argument("dess: a > b");
  for (std::size_t i = 0; i < m; ++i) {
    if (i + 1 < m && v[i] > v[i + 1]) throw std::invalid_argument("dess: input not sorted");
    if (v[i] < a || v[i] > b) throw std::invalid_argument("dess: value outside [a, b]");
  }
  double w = b - a;
  if (w == 0.0) return 0.0;
  double md = static_cast<double>(m);
  double acc = md / (6.0 * (md + 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    double u = (v[i] - a) / w;
    double d = u - static_cast<double>(i + 1) / (md + 1.0);
    acc += d * d;
  }
  return w * w * acc;
}

DessBand calibrate_band(int n, double alpha, int m_replicates, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("calibrate_band: n < 1");
  if (m_replicates < 2) throw std::invalid_argument("calibrate_band: too few replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("calibrate_band: bad alpha");

  std::vector<double> scores(static_cast<std::size_t>(m_replicates));
  parallel_for(scores.size(), [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    std::vector<double> u(static_cast<std::size_t>(n));
    for (double& x : u) x = rng.uniform01();
    std::sort(u.begin(), u.end());
    scores[r] = 3.0 * dess(u, 0.0, 1.0);
  });
  std::sort(scores.begin(), scores.end());

  auto quantile = [&](double q) {
    double pos = q * static_cast<double>(m_replicates);
    long idx = static_cast<long>(std::ceil(pos)) - 1;
    idx = std::clamp<long>(idx, 0, m_replicates - 1);
    return scores[static_cast<std::size_t>(idx)];
  };

  DessBand band;
  band.lo = quantile(alpha / 2.0);
  band.hi = quantile(1.0 - alpha / 2.0);
  band.alpha = alpha;
  band.n_calibration = n;
  band.m_replicates = m_replicates;
  return band;
}

bool dess_criterion(std::span<const double> v, double a, double b, const DessBand& band) {
  if (v.empty()) throw std::invalid_argument("dess_criterion: empty input");
  if (v.size() == 1) return true;
  double w = b - a;
  if (w == 0.0) return true;
  double score = 3.0 * dess(v, a, b) / (w * w);
  return band.lo <= score && score <= band.hi;
}

}  // namespace gh
