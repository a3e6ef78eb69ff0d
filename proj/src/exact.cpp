#include "gbp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gbp/error.hpp"

namespace gbp {

namespace {

double pivot_floor(const GaussianModel& model) {
  double max_diag = 0.0;
  for (double a : model.diag()) max_diag = std::max(max_diag, std::abs(a));
  return kPivotTolerance * max_diag;
}

template <typename Vec>
void check_pivots(const Vec& pivots, double floor) {
  for (Eigen::Index k = 0; k < pivots.size(); ++k) {
    if (!(pivots[k] > floor))
      throw NotPositiveDefinite(static_cast<std::size_t>(k), pivots[k]);
  }
}

Eigen::VectorXd potential_vector(const GaussianModel& model) {
  Eigen::VectorXd b(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) b[i] = model.potential(i);
  return b;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ExactSolution solve_dense(const GaussianModel& model, bool want_full) {
  const Eigen::MatrixXd a = dense_information(model);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NotPositiveDefinite(0, 0.0);
  check_pivots(ldlt.vectorD(), pivot_floor(model));

  ExactSolution out;
  out.mean = to_std(ldlt.solve(potential_vector(model)));
  Eigen::MatrixXd p = ldlt.solve(
      Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  out.marginal_variances = to_std(p.diagonal());
  if (want_full) out.full_covariance = std::move(p);
  return out;
}

ExactSolution solve_sparse(const GaussianModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(model.size() + model.slot_count());
  for (std::size_t i = 0; i < model.size(); ++i) {
    triplets.emplace_back(i, i, model.diag(i));
    for (const Neighbor& nb : model.neighbors(i))
      triplets.emplace_back(i, nb.node, nb.coupling);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NotPositiveDefinite(0, 0.0);
  check_pivots(ldlt.vectorD(), pivot_floor(model));

  ExactSolution out;
  out.mean = to_std(ldlt.solve(potential_vector(model)));
  out.marginal_variances.resize(model.size());
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    unit[i] = 1.0;
    out.marginal_variances[i] = ldlt.solve(unit)[i];
    unit[i] = 0.0;
  }
  return out;
}

// Breadth-first forest traversal. order[k] is the k-th visited node;
// parent_slot[u] is the slot (u -> parent) or npos for component roots.
struct Forest {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<NodeId> order;
  std::vector<std::size_t> parent_slot;
};

Forest traverse(const GaussianModel& model, std::span<const NodeId> roots) {
  const std::size_t n = model.size();
  Forest f;
  f.parent_slot.assign(n, Forest::npos);
  std::vector<char> seen(n, 0);
  std::size_t tree_edges = 0;
  std::size_t component_edge_slots = 0;
  for (NodeId r : roots) {
    if (seen[r]) continue;
    seen[r] = 1;
    std::size_t head = f.order.size();
    f.order.push_back(r);
    while (head < f.order.size()) {
      const NodeId u = f.order[head++];
      component_edge_slots += model.degree(u);
      for (std::size_t s = model.slot_begin(u), e = s + model.degree(u);
           s < e; ++s) {
        const NodeId v = model.slot(s).node;
        if (seen[v]) continue;
        seen[v] = 1;
        f.parent_slot[v] = model.slot(s).reverse;
        f.order.push_back(v);
        ++tree_edges;
      }
    }
  }
  if (component_edge_slots != 2 * tree_edges)
    throw NotATree("graph contains a cycle");
  return f;
}

struct Upward {
  std::vector<double> precision;
  std::vector<double> potential;
  std::vector<double> msg_precision;  // message from u to its parent
  std::vector<double> msg_potential;
};

Upward eliminate_upward(const GaussianModel& model, const Forest& f) {
  const std::size_t n = model.size();
  const double floor = pivot_floor(model);
  Upward up{std::vector<double>(model.diag().begin(), model.diag().end()),
            std::vector<double>(model.potentials().begin(),
                                model.potentials().end()),
            std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t k = f.order.size(); k-- > 0;) {
    const NodeId u = f.order[k];
    if (!(up.precision[u] > floor))
      throw NotPositiveDefinite(f.order.size() - 1 - k, up.precision[u]);
    const std::size_t ps = f.parent_slot[u];
    if (ps == Forest::npos) continue;
    const Neighbor& link = model.slot(ps);
    up.msg_precision[u] = -link.coupling * link.coupling / up.precision[u];
    up.msg_potential[u] = -link.coupling * up.potential[u] / up.precision[u];
    up.precision[link.node] += up.msg_precision[u];
    up.potential[link.node] += up.msg_potential[u];
  }
  return up;
}

}  // namespace

Eigen::MatrixXd dense_information(const GaussianModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < model.size(); ++i) {
    a(i, i) = model.diag(i);
    for (const Neighbor& nb : model.neighbors(i)) a(i, nb.node) = nb.coupling;
  }
  return a;
}

ExactSolution solve(const GaussianModel& model, bool want_full_covariance,
                    std::size_t dense_limit) {
  require_valid(model);
  if (model.size() <= dense_limit)
    return solve_dense(model, want_full_covariance);
  return solve_sparse(model);
}

ExactSolution solve_tree(const GaussianModel& model, bool want_full_covariance,
                         std::size_t dense_limit) {
  require_valid(model);
  const std::size_t n = model.size();
  std::vector<NodeId> roots(n);
  for (std::size_t i = 0; i < n; ++i) roots[i] = i;
  const Forest f = traverse(model, roots);
  const Upward up = eliminate_upward(model, f);

  std::vector<double> precision(n);
  std::vector<double> potential(n);
  for (const NodeId u : f.order) {
    const std::size_t ps = f.parent_slot[u];
    if (ps == Forest::npos) {
      precision[u] = up.precision[u];
      potential[u] = up.potential[u];
      continue;
    }
    const Neighbor& link = model.slot(ps);
    const NodeId p = link.node;
    // Parent belief with u's own contribution removed.
    const double cavity_precision = precision[p] - up.msg_precision[u];
    const double cavity_potential = potential[p] - up.msg_potential[u];
    precision[u] =
        up.precision[u] - link.coupling * link.coupling / cavity_precision;
    potential[u] =
        up.potential[u] - link.coupling * cavity_potential / cavity_precision;
  }

  ExactSolution out;
  out.mean.resize(n);
  out.marginal_variances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.mean[i] = potential[i] / precision[i];
    out.marginal_variances[i] = 1.0 / precision[i];
  }
  if (want_full_covariance && n <= dense_limit)
    out.full_covariance = solve_dense(model, true).full_covariance;
  return out;
}

RootMarginal solve_tree_root(const GaussianModel& model, NodeId root) {
  const NodeId roots[] = {root};
  const Forest f = traverse(model, roots);
  const Upward up = eliminate_upward(model, f);
  return {up.potential[root] / up.precision[root], 1.0 / up.precision[root]};
}

}  // namespace gbp
