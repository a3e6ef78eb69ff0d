#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "gbp/model.hpp"

namespace gbp {

using SparseMatrix = Eigen::SparseMatrix<double>;

// R = I - A~ and its entrywise absolute value on a unit-diagonal model.
struct EdgeWeightMatrix {
  SparseMatrix r;
  SparseMatrix abs_r;
};

EdgeWeightMatrix edge_weights(const NormalizedModel& model);

struct SpectralEstimate {
  double estimate = 0.0;      // midpoint of [lower, upper]
  double achieved_tol = 0.0;  // half-width of the bracket
  double lower = 0.0;
  double upper = 0.0;
  std::size_t iterations = 0;
};

inline constexpr double kSpectralTolerance = 1e-10;
inline constexpr std::size_t kSpectralMaxIterations = 200000;

/// Spectral radius of an entrywise nonnegative square matrix by power
/// iteration on (M + I) from the all-ones vector.
///
/// The shift keeps every iterate strictly positive and separates rho from
/// -rho on bipartite graphs. For positive v the Collatz-Wielandt ratios
///   min_i (Mv)_i / v_i <= rho(M) <= max_i (Mv)_i / v_i
/// hold without any irreducibility assumption, so [lower, upper] is always
/// a rigorous enclosure. For symmetric M the Rayleigh quotient is a second
/// lower bound, which closes the bracket on disconnected graphs where the
/// minimum ratio sticks to a smaller component.
///
/// Throws DidNotConverge (carrying the bracket) after max_iterations.
SpectralEstimate spectral_radius(const SparseMatrix& m,
                                 double tol = kSpectralTolerance,
                                 std::size_t max_iterations =
                                     kSpectralMaxIterations);

struct WalkSummabilityReport {
  double rho_bar = 0.0;
  double rho_tol = 0.0;
  bool walk_summable = false;
  // d > 0 with (I - R_bar) d >= 1, i.e. diag(d)^-1 A~ diag(d) diagonally
  // dominant. Present iff walk_summable.
  std::optional<std::vector<double>> scaling;
  // C = max_i (sum_{l>=1} R_bar^l |b|)_i. Present iff walk_summable.
  std::optional<double> theorem1_c;
  // Upper end of the spectral bracket; the rate used in error bounds.
  double rho_upper() const { return rho_bar + rho_tol; }
};

WalkSummabilityReport analyze(const NormalizedModel& model,
                              std::span<const double> b_abs);
// Uses |b~| of the normalized model.
WalkSummabilityReport analyze(const NormalizedModel& model);

// Truncation rule shared by the certificate and the constant C: stop when
// the increment's sup-norm drops below kNeumannTolerance, or after
// 10 * ceil(log(kNeumannTolerance) / log(rho)) terms.
inline constexpr double kNeumannTolerance = 1e-12;

struct Walk {
  std::vector<NodeId> nodes;  // w_0 ... w_l
  double weight = 1.0;        // product of r along consecutive pairs
  std::size_t length() const { return nodes.size() - 1; }
};

inline constexpr std::size_t kEnumerationLengthLimit = 12;
inline constexpr std::size_t kEnumerationCountLimit = 10'000'000;

// All walks from -> to of exactly `length` steps, in lexicographic order.
// Throws LimitExceeded when length > kEnumerationLengthLimit or the walk
// count would exceed kEnumerationCountLimit.
std::vector<Walk> enumerate_walks(const NormalizedModel& model, NodeId from,
                                  NodeId to, std::size_t length);

struct PowerCheck {
  double enumerated_sum = 0.0;
  double matrix_power_entry = 0.0;
  // Sum of |weights|, the natural scale for comparing the two routes.
  double absolute_sum = 0.0;
};

// Sum of walk weights i -> j of length l, next to (R^l)_ij by repeated
// sparse products.
PowerCheck walk_sum_power_check(const NormalizedModel& model, NodeId i,
                                NodeId j, std::size_t length);

struct SeriesPartialSums {
  // mean[l] = sum_{m<=l} R^m b, variance[l] = diag(sum_{m<=l} R^m).
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> variance;
  // rho^(L+1) / (1 - rho) with rho the upper end of the spectral bracket.
  double tail_bound = 0.0;
  double rho_bar = 0.0;
};

// Throws NotWalkSummable when rho(R_bar) is not certified below 1.
SeriesPartialSums series_mean_variance(const NormalizedModel& model,
                                       std::span<const double> b,
                                       std::size_t horizon);

}  // namespace gbp
