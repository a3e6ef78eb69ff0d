#include "gbp/ctree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gbp/bp.hpp"
#include "gbp/error.hpp"
#include "gbp/exact.hpp"
#include "gbp/walksum.hpp"

namespace gbp {

std::vector<std::size_t> ComputationTree::layer_sizes() const {
  std::vector<std::size_t> sizes(depth + 1, 0);
  for (const TreeNode& node : nodes) ++sizes[node.layer];
  return sizes;
}

std::size_t tree_size(const GaussianModel& model, NodeId root,
                      std::size_t depth, std::size_t limit) {
  if (root >= model.size()) throw Error("tree root out of range");
  // count[s]: tree nodes on the current layer reached through slot s.
  std::vector<std::size_t> count(model.slot_count(), 0);
  std::size_t total = 1;
  const std::size_t cap = limit + 1;
  const std::size_t begin = model.slot_begin(root);
  for (std::size_t s = begin; s < begin + model.degree(root); ++s) count[s] = 1;

  for (std::size_t layer = 1; layer <= depth; ++layer) {
    std::size_t layer_total = 0;
    for (std::size_t c : count) layer_total = std::min(cap, layer_total + c);
    total = std::min(cap, total + layer_total);
    if (total >= cap || layer_total == 0 || layer == depth) break;

    std::vector<std::size_t> next(model.slot_count(), 0);
    for (std::size_t s = 0; s < model.slot_count(); ++s) {
      if (count[s] == 0) continue;
      const NodeId u = model.slot(s).node;
      const std::size_t back = model.slot(s).reverse;
      const std::size_t ub = model.slot_begin(u);
      for (std::size_t t = ub; t < ub + model.degree(u); ++t)
        if (t != back) next[t] = std::min(cap, next[t] + count[s]);
    }
    count = std::move(next);
  }
  return total;
}

ComputationTree build(const GaussianModel& model, NodeId root,
                      std::size_t depth, std::size_t limit) {
  require_valid(model);
  const std::size_t size = tree_size(model, root, depth, limit);
  if (size > limit)
    throw SizeLimit("depth-" + std::to_string(depth) + " tree around node " +
                    std::to_string(root + 1) + " exceeds the size limit of " +
                    std::to_string(limit) + " nodes");

  ComputationTree tree;
  tree.root = root;
  tree.depth = depth;
  tree.nodes.reserve(size);
  tree.nodes.push_back({TreeNode::npos, root, 0});

  std::vector<double> diag{model.diag(root)};
  std::vector<double> potentials{model.potential(root)};
  std::vector<Edge> edges;
  diag.reserve(size);
  potentials.reserve(size);
  edges.reserve(size - 1);

  for (std::size_t idx = 0; idx < tree.nodes.size(); ++idx) {
    const TreeNode node = tree.nodes[idx];
    if (node.layer == depth) break;  // breadth-first: all later nodes too
    const bool has_parent = node.parent != TreeNode::npos;
    const NodeId parent_original =
        has_parent ? tree.nodes[node.parent].copy_of : 0;
    for (const Neighbor& nb : model.neighbors(node.copy_of)) {
      if (has_parent && nb.node == parent_original) continue;
      const std::size_t child = tree.nodes.size();
      tree.nodes.push_back({idx, nb.node, node.layer + 1});
      diag.push_back(model.diag(nb.node));
      potentials.push_back(model.potential(nb.node));
      edges.push_back({idx, child, nb.coupling});
    }
  }
  tree.tree_model = GaussianModel(std::move(diag), std::move(potentials),
                                  std::move(edges));
  return tree;
}

RootSolution solve_root(const ComputationTree& tree) {
  const RootMarginal m = solve_tree_root(tree.tree_model, 0);
  return {m.mean, m.variance};
}

Equivalence verify_bp_equivalence(const GaussianModel& model, NodeId root,
                                  std::size_t k, std::size_t limit) {
  const ComputationTree tree = build(model, root, k, limit);
  const double tree_mean = solve_root(tree).mean;
  const double bp_mean = marginals_at(model, k).mean[root];
  return {bp_mean, tree_mean, std::abs(bp_mean - tree_mean), tree.size()};
}

namespace {

// Weights of every walk of the given length that starts at `start`. A walk
// ending at v read backwards is a walk starting at v with the same weight,
// since R is symmetric.
void collect_weights(const GaussianModel& g, NodeId start, std::size_t length,
                     std::vector<double>& out) {
  auto extend = [&](auto&& self, NodeId u, double weight,
                    std::size_t remaining) -> void {
    if (remaining == 0) {
      out.push_back(weight);
      if (out.size() > kEnumerationCountLimit)
        throw LimitExceeded("walk count exceeds the enumeration limit");
      return;
    }
    for (const Neighbor& nb : g.neighbors(u))
      self(self, nb.node, weight * -nb.coupling, remaining - 1);
  };
  extend(extend, start, 1.0, length);
}

bool same_multiset(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i])))
      return false;
  return true;
}

}  // namespace

WalkCorrespondence verify_walk_correspondence(const NormalizedModel& model,
                                              NodeId root, std::size_t k,
                                              std::size_t max_len) {
  if (max_len > k)
    throw Error("walk correspondence needs max_len <= depth");
  if (max_len > kEnumerationLengthLimit)
    throw LimitExceeded("walk length exceeds the enumeration limit");
  const ComputationTree tree = build(model.base, root, k);

  WalkCorrespondence out;
  for (std::size_t l = 0; l <= max_len; ++l) {
    std::vector<double> graph_weights;
    std::vector<double> tree_weights;
    collect_weights(model.base, root, l, graph_weights);
    collect_weights(tree.tree_model, 0, l, tree_weights);
    out.graph_walks.push_back(graph_weights.size());
    out.tree_walks.push_back(tree_weights.size());
    if (!same_multiset(std::move(graph_weights), std::move(tree_weights)))
      out.verdict = false;
  }
  return out;
}

std::string format_tree(const ComputationTree& tree) {
  std::string out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& node = tree.nodes[i];
    out += std::to_string(i + 1);
    out += ' ';
    out += node.parent == TreeNode::npos ? std::string("-")
                                         : std::to_string(node.parent + 1);
    out += ' ';
    out += std::to_string(node.copy_of + 1);
    out += ' ';
    out += std::to_string(node.layer);
    out += '\n';
  }
  return out;
}

}  // namespace gbp
