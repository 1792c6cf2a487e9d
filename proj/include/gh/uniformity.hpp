#pragma once

#include <cstdint>
#include <span>

#include "gh/core.hpp"

namespace gh {

// Mean of the k-th order statistic of n i.i.d. U(0,1) draws, k in [1, n].
double order_stat_mean(int k, int n);

// Sum over k of Var[U_(k)] = n / (6 (n + 1)).
double total_order_stat_variance(int n);

// Decoding error sum of squares of sorted values against the uniform layout
// on [a, b]. Requires sorted input inside [a, b] and a < b (a == b only when
// every value equals it, giving 0).
double dess(std::span<const double> sorted_values, double a, double b);

// Monte Carlo band for 3 * DESS / (b - a)^2 of a uniform sample of size n:
// simulates m_replicates samples of n U(0,1) draws, scores each with
// dess(., 0, 1) * 3, and takes the alpha/2 and 1 - alpha/2 quantiles.
DessBand calibrate_band(int n, double alpha, int m_replicates, std::uint64_t seed);

// True when 3 * dess / (b - a)^2 falls inside [band.lo, band.hi].
// A single value is vacuously uniform.
bool dess_criterion(std::span<const double> sorted_values, double a, double b,
                    const DessBand& band);

}  // namespace gh
