#include "gbp/walksum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gbp/error.hpp"

namespace gbp {

namespace {

using Vector = Eigen::VectorXd;

// Keeps power iterates strictly positive; any positive vector gives valid
// Collatz-Wielandt bounds, so clamping does not affect correctness.
constexpr double kIterateFloor = 1e-200;

bool is_symmetric(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const SparseMatrix t = m.transpose();
  return (m - t).norm() == 0.0;
}

std::size_t neumann_cap(double rho) {
  if (!(rho > 0.0)) return 1;
  const double terms = std::ceil(std::log(kNeumannTolerance) / std::log(rho));
  return std::max<std::size_t>(1, 10 * static_cast<std::size_t>(terms));
}

// sum_{l=first}^{...} M^l x, truncated by the shared rule.
Vector neumann_sum(const SparseMatrix& m, Vector term, std::size_t first,
                   double rho) {
  const std::size_t cap = neumann_cap(rho);
  Vector sum = Vector::Zero(term.size());
  if (first == 0) sum = term;
  for (std::size_t l = 1; l <= cap; ++l) {
    term = m * term;
    sum += term;
    if (term.lpNorm<Eigen::Infinity>() < kNeumannTolerance) break;
  }
  return sum;
}

}  // namespace

EdgeWeightMatrix edge_weights(const NormalizedModel& model) {
  const GaussianModel& g = model.base;
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> r;
  std::vector<Eigen::Triplet<double>> abs_r;
  r.reserve(g.slot_count());
  abs_r.reserve(g.slot_count());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const Neighbor& nb : g.neighbors(i)) {
      r.emplace_back(i, nb.node, -nb.coupling);
      abs_r.emplace_back(i, nb.node, std::abs(nb.coupling));
    }
  }
  EdgeWeightMatrix out{SparseMatrix(n, n), SparseMatrix(n, n)};
  out.r.setFromTriplets(r.begin(), r.end());
  out.abs_r.setFromTriplets(abs_r.begin(), abs_r.end());
  return out;
}

SpectralEstimate spectral_radius(const SparseMatrix& m, double tol,
                                 std::size_t max_iterations) {
  if (m.rows() != m.cols()) throw Error("spectral_radius: matrix is not square");
  if (!(tol > 0.0)) throw Error("spectral_radius: tolerance must be positive");
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.value() < 0.0)
        throw Error("spectral_radius: matrix has a negative entry");

  SpectralEstimate est;
  const Eigen::Index n = m.rows();
  if (n == 0) return est;

  const bool symmetric = is_symmetric(m);
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  Vector v = Vector::Ones(n);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Vector w = m * v + v;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ratio = w[i] / v[i];
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);
    }
    lower = std::max(lower, min_ratio - 1.0);
    upper = std::min(upper, max_ratio - 1.0);
    if (symmetric) lower = std::max(lower, v.dot(w) / v.squaredNorm() - 1.0);
    upper = std::max(upper, lower);

    est.iterations = it;
    if (upper - lower <= 2.0 * tol) break;
    if (it == max_iterations) throw DidNotConverge(it, lower, upper);

    v = w / w.maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(v[i], kIterateFloor);
  }
  est.lower = lower;
  est.upper = upper;
  est.estimate = 0.5 * (lower + upper);
  est.achieved_tol = 0.5 * (upper - lower);
  return est;
}

WalkSummabilityReport analyze(const NormalizedModel& model,
                              std::span<const double> b_abs) {
  const std::size_t n = model.base.size();
  if (b_abs.size() != n)
    throw Error("analyze: |b| has " + std::to_string(b_abs.size()) +
                " entries for " + std::to_string(n) + " nodes");
  const EdgeWeightMatrix w = edge_weights(model);
  const SpectralEstimate rho = spectral_radius(w.abs_r);

  WalkSummabilityReport report;
  report.rho_bar = rho.estimate;
  report.rho_tol = rho.achieved_tol;
  report.walk_summable = rho.estimate + rho.achieved_tol < 1.0;
  if (!report.walk_summable) return report;

  const Vector d = neumann_sum(w.abs_r, Vector::Ones(n), 0, rho.estimate);
  report.scaling = std::vector<double>(d.data(), d.data() + d.size());

  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = std::abs(b_abs[i]);
  const Vector tail = neumann_sum(w.abs_r, b, 1, rho.estimate);
  report.theorem1_c = tail.maxCoeff();
  return report;
}

WalkSummabilityReport analyze(const NormalizedModel& model) {
  const auto b = model.base.potentials();
  std::vector<double> b_abs(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) b_abs[i] = std::abs(b[i]);
  return analyze(model, b_abs);
}

std::vector<Walk> enumerate_walks(const NormalizedModel& model, NodeId from,
                                  NodeId to, std::size_t length) {
  const GaussianModel& g = model.base;
  const std::size_t n = g.size();
  if (from >= n || to >= n) throw Error("enumerate_walks: node out of range");
  if (length > kEnumerationLengthLimit)
    throw LimitExceeded("walk length " + std::to_string(length) +
                        " exceeds the enumeration limit of " +
                        std::to_string(kEnumerationLengthLimit));

  // reach[l][v]: number of walks v -> to with l steps.
  std::vector<std::vector<double>> reach(length + 1, std::vector<double>(n));
  reach[0][to] = 1.0;
  for (std::size_t l = 1; l <= length; ++l)
    for (std::size_t v = 0; v < n; ++v)
      for (const Neighbor& nb : g.neighbors(v)) reach[l][v] += reach[l - 1][nb.node];
  if (reach[length][from] > static_cast<double>(kEnumerationCountLimit))
    throw LimitExceeded("walk count " + std::to_string(reach[length][from]) +
                        " exceeds the enumeration limit");

  std::vector<Walk> walks;
  walks.reserve(static_cast<std::size_t>(reach[length][from]));
  Walk current;
  current.nodes.push_back(from);
  auto extend = [&](auto&& self, std::size_t remaining) -> void {
    const NodeId u = current.nodes.back();
    if (remaining == 0) {
      if (u == to) walks.push_back(current);
      return;
    }
    const double weight = current.weight;
    for (const Neighbor& nb : g.neighbors(u)) {
      if (reach[remaining - 1][nb.node] == 0.0) continue;
      current.nodes.push_back(nb.node);
      current.weight = weight * -nb.coupling;
      self(self, remaining - 1);
      current.nodes.pop_back();
    }
    current.weight = weight;
  };
  extend(extend, length);
  return walks;
}

PowerCheck walk_sum_power_check(const NormalizedModel& model, NodeId i,
                                NodeId j, std::size_t length) {
  PowerCheck out;
  for (const Walk& w : enumerate_walks(model, i, j, length)) {
    out.enumerated_sum += w.weight;
    out.absolute_sum += std::abs(w.weight);
  }
  const SparseMatrix r = edge_weights(model).r;
  Vector x = Vector::Zero(r.rows());
  x[static_cast<Eigen::Index>(j)] = 1.0;
  for (std::size_t l = 0; l < length; ++l) x = r * x;
  out.matrix_power_entry = x[static_cast<Eigen::Index>(i)];
  return out;
}

SeriesPartialSums series_mean_variance(const NormalizedModel& model,
                                       std::span<const double> b,
                                       std::size_t horizon) {
  const std::size_t n = model.base.size();
  if (b.size() != n) throw Error("series_mean_variance: size mismatch");
  const EdgeWeightMatrix w = edge_weights(model);
  const SpectralEstimate rho = spectral_radius(w.abs_r);
  if (!(rho.upper < 1.0))
    throw NotWalkSummable("spectral radius of |R| is " +
                          std::to_string(rho.estimate) +
                          "; the walk-sum series may diverge");

  SeriesPartialSums out;
  out.rho_bar = rho.estimate;
  out.tail_bound = std::pow(rho.upper, static_cast<double>(horizon + 1)) /
                   (1.0 - rho.upper);

  Vector term = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(n));
  Vector sum = term;
  out.mean.reserve(horizon + 1);
  out.mean.emplace_back(sum.data(), sum.data() + n);
  for (std::size_t l = 1; l <= horizon; ++l) {
    term = w.r * term;
    sum += term;
    out.mean.emplace_back(sum.data(), sum.data() + n);
  }

  out.variance.assign(horizon + 1, std::vector<double>(n));
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.setZero();
    x[static_cast<Eigen::Index>(i)] = 1.0;
    double acc = 1.0;
    out.variance[0][i] = acc;
    for (std::size_t l = 1; l <= horizon; ++l) {
      x = w.r * x;
      acc += x[static_cast<Eigen::Index>(i)];
      out.variance[l][i] = acc;
    }
  }
  return out;
}

}  // namespace gbp
