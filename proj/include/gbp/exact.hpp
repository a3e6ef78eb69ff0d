#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gbp/model.hpp"

namespace gbp {

inline constexpr std::size_t kDenseLimit = 2000;
// Pivots at or below this fraction of max|a_ii| are treated as nonpositive.
inline constexpr double kPivotTolerance = 1e-12;

struct ExactSolution {
  std::vector<double> mean;                // A^-1 b
  std::vector<double> marginal_variances;  // diag(A^-1)
  std::optional<Eigen::MatrixXd> full_covariance;
};

// Direct solve by symmetric LDL' factorization: dense up to dense_limit
// nodes, sparse (AMD ordered) beyond. full_covariance is filled only when
// requested and n <= dense_limit.
ExactSolution solve(const GaussianModel& model, bool want_full_covariance = false,
                    std::size_t dense_limit = kDenseLimit);

// Leaf-to-root elimination followed by a root-to-leaf pass. Works on forests;
// throws NotATree when the graph has a cycle.
ExactSolution solve_tree(const GaussianModel& model,
                         bool want_full_covariance = false,
                         std::size_t dense_limit = kDenseLimit);

struct RootMarginal {
  double mean;
  double variance;
};

// Upward elimination only, towards `root`. Cheaper than solve_tree when only
// one node is needed (computation trees).
RootMarginal solve_tree_root(const GaussianModel& model, NodeId root);

// Dense A as an Eigen matrix.
Eigen::MatrixXd dense_information(const GaussianModel& model);

}  // namespace gbp
