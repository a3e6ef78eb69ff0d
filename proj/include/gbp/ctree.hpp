#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "gbp/model.hpp"

namespace gbp {

inline constexpr std::size_t kTreeSizeLimit = 1'000'000;

struct TreeNode {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t parent = npos;  // tree index, npos for the root
  NodeId copy_of = 0;         // node of the original graph
  std::size_t layer = 0;
};

/// Depth-t unwrapped tree around `root`. Nodes are listed breadth-first with
/// the root at index 0; children of a copy of v are copies of
/// N_v \ {parent's original}, in ascending original id. tree_model copies
/// a_ii, b_i and a_ij from the original graph.
struct ComputationTree {
  NodeId root = 0;
  std::size_t depth = 0;
  std::vector<TreeNode> nodes;
  GaussianModel tree_model;

  std::size_t size() const { return nodes.size(); }
  std::vector<std::size_t> layer_sizes() const;
};

// Node count of the depth-t tree, computed without building it. Saturates
// at limit + 1.
std::size_t tree_size(const GaussianModel& model, NodeId root,
                      std::size_t depth, std::size_t limit = kTreeSizeLimit);

// Throws SizeLimit when the tree would exceed `limit` nodes.
ComputationTree build(const GaussianModel& model, NodeId root,
                      std::size_t depth, std::size_t limit = kTreeSizeLimit);

struct RootSolution {
  double mean;
  double variance;
};

RootSolution solve_root(const ComputationTree& tree);

struct Equivalence {
  double bp_mean;
  double tree_mean;
  double difference;
  std::size_t tree_nodes;
};

inline constexpr double kEquivalenceTolerance = 1e-9;

// mu_root(k) from k rounds of BP on the graph against the exact root mean of
// the depth-k tree.
Equivalence verify_bp_equivalence(const GaussianModel& model, NodeId root,
                                  std::size_t k,
                                  std::size_t limit = kTreeSizeLimit);

struct WalkCorrespondence {
  bool verdict = true;
  // Per length l = 0..max_len: number of walks found on each side.
  std::vector<std::size_t> graph_walks;
  std::vector<std::size_t> tree_walks;
};

// Compares, for every l <= max_len <= k, the multiset of weights of
// length-l walks in the graph that end at `root` with the same multiset for
// walks in the depth-k tree ending at its root.
WalkCorrespondence verify_walk_correspondence(const NormalizedModel& model,
                                              NodeId root, std::size_t k,
                                              std::size_t max_len);

// Text export: one line per node, "<tree_id> <parent_id|-> <original_id>
// <layer>", 1-based ids, breadth-first.
std::string format_tree(const ComputationTree& tree);

}  // namespace gbp
