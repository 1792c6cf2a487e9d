#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gh/anoht_tree.hpp"
#include "gh/builder.hpp"
#include "gh/core.hpp"

namespace gh {

// Right-continuous step function: times are the distinct event times in
// ascending order, values the estimate immediately after each one.
struct StepEstimate {
  std::vector<double> times;
  std::vector<double> values;
  std::string kind;  // "survival" or "cumhaz"
};

// Value at t (rightmost time <= t); before the first jump this is 1 for a
// Kaplan-Meier curve and 0 for a cumulative hazard.
double step_value(const StepEstimate& e, double t);

// Left limit at t (rightmost time strictly below t).
double step_value_before(const StepEstimate& e, double t);

// Product-limit survival estimate. Ties put events before censored
// observations so events see the larger risk set.
StepEstimate kaplan_meier(const SortedSample& s);

// Cumulative hazard estimate with the same tie convention.
StepEstimate nelson_aalen(const SortedSample& s);

// n * sum of delta_(i) / ((n - i)(n - i + 1)) over observations with
// t_lo <= X_(i) <= t_hi, skipping the largest rank.
double variance_integral(const SortedSample& s, double t_lo, double t_hi);

struct CensoredHistogram {
  SortedSample uncensored;
  GappedHistogram histogram;
  std::vector<double> masses;  // one per bin, from the full-sample curve
  StepEstimate km;
};

// Histogram of the uncensored values (at least 2 required) with bin masses
// redistributed by the full-sample Kaplan-Meier curve:
// mass_k = S(a_k-) - S(b_k). The masses sum to 1 - S(b_K).
CensoredHistogram censored_histogram(const SortedSample& s, const L0Spec& l0_spec,
                                     Linkage linkage, const DessBand& band);

// Covariance kernel of the survival increments (x 1/n): entry (i, j) with
// i <= j is S_i S_j * cumulative integral through edge i.
Eigen::MatrixXd sigma_km(const Eigen::VectorXd& s_at_edges,
                         const Eigen::VectorXd& integrals);

// Covariance kernel of the hazard increments (x 1/n): diag(integrals).
Eigen::MatrixXd sigma_na(const Eigen::VectorXd& integrals);

enum class SurvivalBasis { km, na };

std::string survival_basis_name(SurvivalBasis b);
SurvivalBasis survival_basis_from_name(const std::string& s);

struct CensoredAuthenticity {
  AuthenticityReport report;
  std::vector<std::string> treatments;  // rows that entered the tree
  std::vector<std::string> warnings;
  SurvivalBasis basis = SurvivalBasis::km;
};

// Treatment-tree authenticity for censored data. Rows are per-treatment
// increments of the chosen estimate across the pooled histogram bins; mimic
// noise uses the increment covariance (the differenced sigma_km for the km
// basis, sigma_na as-is) over an effective sample of 2 n_j. Treatments
// without any event are excluded with a warning.
CensoredAuthenticity censored_authenticity(const SortedSample& s,
                                           const GappedHistogram& h, int B,
                                           std::uint64_t seed, SurvivalBasis basis);

ordered_json to_json(const StepEstimate& e);

}  // namespace gh
