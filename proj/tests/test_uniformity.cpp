#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "gh/rng.hpp"
#include "gh/uniformity.hpp"

using namespace gh;

TEST_CASE("order statistic moments") {
  CHECK(order_stat_mean(1, 1) == doctest::Approx(0.5));
  CHECK(order_stat_mean(3, 9) == doctest::Approx(0.3));
  CHECK(total_order_stat_variance(1) == doctest::Approx(1.0 / 12.0));
  CHECK(total_order_stat_variance(5) == doctest::Approx(5.0 / 36.0));
  CHECK_THROWS_AS(order_stat_mean(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(order_stat_mean(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(total_order_stat_variance(0), std::invalid_argument);
}

TEST_CASE("total variance equals the summed order statistic variances") {
  for (int n : {1, 2, 3, 10, 100, 1000}) {
    double sum = 0.0;
    double np1 = n + 1.0;
    for (int k = 1; k <= n; ++k) sum += k * (n - k + 1.0) / (np1 * np1 * (n + 2.0));
    CHECK(std::abs(total_order_stat_variance(n) - sum) <= 1e-12);
  }
}

TEST_CASE("dess closed-form examples") {
  std::vector<double> grid{0.25, 0.5, 0.75};
  CHECK(dess(grid, 0.0, 1.0) == doctest::Approx(0.125).epsilon(1e-12));

  std::vector<double> mid{0.5};
  CHECK(dess(mid, 0.0, 1.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));

  std::vector<double> mid_wide{3.0};
  CHECK(dess(mid_wide, 1.0, 5.0) == doctest::Approx(16.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("dess is scale and shift equivariant") {
  Rng rng(99);
  std::vector<double> x(40);
  for (double& v : x) v = rng.uniform01();
  std::sort(x.begin(), x.end());
  double base = dess(x, 0.0, 1.0);
  for (double c : {2.0, 0.25, 17.5}) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = c * x[i] - 3.0;
    CHECK(dess(y, -3.0, c - 3.0) == doctest::Approx(c * c * base).epsilon(1e-12));
  }
}

TEST_CASE("dess rejects bad input") {
  std::vector<double> unsorted{0.5, 0.25};
  CHECK_THROWS_AS(dess(unsorted, 0.0, 1.0), std::invalid_argument);
  std::vector<double> outside{0.5, 1.5};
  CHECK_THROWS_AS(dess(outside, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dess(std::vector<double>{}, 0.0, 1.0), std::invalid_argument);
  std::vector<double> flat{2.0, 2.0};
  CHECK(dess(flat, 2.0, 2.0) == 0.0);
}

TEST_CASE("dess of uniform samples concentrates near (b-a)^2/3") {
  for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{-5.0, 3.0}}) {
    double acc = 0.0;
    int reps = 200, n = 200;
    for (int r = 0; r < reps; ++r) {
      Rng rng = Rng::stream(4242, static_cast<std::uint64_t>(r));
      std::vector<double> x(static_cast<std::size_t>(n));
      for (double& v : x) v = a + (b - a) * rng.uniform01();
      std::sort(x.begin(), x.end());
      acc += dess(x, a, b);
    }
    double target = (b - a) * (b - a) / 3.0;
    CHECK(std::abs(acc / reps / target - 1.0) < 0.1);
  }
}

TEST_CASE("calibrate_band brackets the uniform score") {
  DessBand band = calibrate_band(100, 0.05, 2000, 777);
  CHECK(band.lo > 0.0);
  CHECK(band.lo < 1.0);
  CHECK(band.hi > 1.0);
  CHECK(band.n_calibration == 100);
  CHECK(band.m_replicates == 2000);
  CHECK(band.alpha == 0.05);

  DessBand tight = calibrate_band(100, 0.5, 2000, 777);
  CHECK(tight.lo > band.lo);
  CHECK(tight.hi < band.hi);
}

TEST_CASE("calibrate_band is deterministic for any worker count") {
  DessBand a = calibrate_band(64, 0.05, 500, 123);
  DessBand b = calibrate_band(64, 0.05, 500, 123);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);

  setenv("GH_WORKERS", "1", 1);
  DessBand w1 = calibrate_band(64, 0.05, 500, 123);
  setenv("GH_WORKERS", "5", 1);
  DessBand w5 = calibrate_band(64, 0.05, 500, 123);
  unsetenv("GH_WORKERS");
  CHECK(w1.lo == w5.lo);
  CHECK(w1.hi == w5.hi);
  CHECK(w1.lo == a.lo);
}

TEST_CASE("dess_criterion accepts uniform data and rejects clumped data") {
  DessBand band = calibrate_band(60, 0.05, 2000, 777);

  Rng rng(5);
  std::vector<double> u(60);
  for (double& v : u) v = rng.uniform01();
  std::sort(u.begin(), u.end());
  CHECK(dess_criterion(u, 0.0, 1.0, band));

  std::vector<double> clumped;
  for (int i = 0; i < 30; ++i) clumped.push_back(0.01 * i / 30.0);
  for (int i = 0; i < 30; ++i) clumped.push_back(0.99 + 0.01 * i / 30.0);
  CHECK_FALSE(dess_criterion(clumped, 0.0, 1.0, band));

  std::vector<double> one{0.123};
  CHECK(dess_criterion(one, 0.0, 1.0, band));
}
