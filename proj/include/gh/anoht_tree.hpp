#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gh/core.hpp"
#include "gh/rng.hpp"

namespace gh {

// Binary tree over treatment rows; leaf sets are arbitrary subsets, kept as
// bitmasks. Leaves are ids [0, J); internal nodes follow in merge order.
struct RowNode {
  double height = 0.0;
  int left = -1;
  int right = -1;
  std::uint64_t mask = 0;
};

struct TreatmentTree {
  std::vector<RowNode> nodes;
  int root = -1;
  int n_leaves = 0;

  bool is_leaf(int id) const { return nodes[id].left < 0; }
};

struct AuthenticityNode {
  std::vector<int> leaf_set;
  int rank_digit = 0;
  double index = 0.0;
};

struct AuthenticityReport {
  std::vector<AuthenticityNode> nodes;
  int B = 0;
};

// Row proportions of the counts matrix. Throws when a treatment is empty.
Eigen::MatrixXd row_normalize(const TreatmentMatrix& t);

// Complete-linkage clustering of the rows under Euclidean distance.
// Distance ties are broken toward the lowest row index.
TreatmentTree treatment_tree(const Eigen::MatrixXd& p);

// Rank of each internal node by merge height, 1 = lowest merge. Ties are
// broken by lowest contained leaf. digits[id] is 0 for leaves.
std::vector<int> rank_digits(const TreatmentTree& t);

// Covariance kernel of the empirical process at grid values F (x 1/n):
// entry (i, j) with i <= j is F_i (1 - F_j). F must be non-decreasing
// inside [0, 1].
Eigen::MatrixXd sigma_bridge(const Eigen::VectorXd& f);

// Covariance of the increment vector: diag(df) - df df^T.
Eigen::MatrixXd sigma_star(const Eigen::VectorXd& df);

// Draws mean + cov^{1/2} z with clamped negative eigenvalues, then clamps
// negative entries to zero and rescales back to the target sum. A draw that
// clamps to all zeros falls back to the mean.
struct MimicSampler {
  Eigen::VectorXd mean;
  Eigen::MatrixXd scale;
  double target_sum = 0.0;

  static MimicSampler from_covariance(const Eigen::VectorXd& mean,
                                      const Eigen::MatrixXd& cov, double n);
  Eigen::VectorXd draw(Rng& rng) const;
};

// One mimicked composition row: Multi-Normal(p, sigma_star(p) / n) with the
// postprocessing above.
Eigen::VectorXd mimic_row(const Eigen::VectorXd& p, double n, std::uint64_t seed);

// Shared authenticity engine: reference tree from ref_rows, B mimic trees
// drawn row by row from the samplers. A reference node scores a hit in a
// replicate when the smallest mimic branch containing its leaf set has rank
// at most the node's own rank.
AuthenticityReport authenticity_core(const Eigen::MatrixXd& ref_rows,
                                     const std::vector<MimicSampler>& samplers,
                                     int B, std::uint64_t seed);

// Authenticity of the treatment tree built from bin compositions. Mimic
// rows use sigma_star(P_j) over an effective sample of 2 n_j.
AuthenticityReport authenticity(const TreatmentMatrix& t, int B, std::uint64_t seed);

ordered_json to_json(const TreatmentTree& t);
ordered_json to_json(const AuthenticityReport& r);

}  // namespace gh
