#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gbp/error.hpp"
#include "gbp/model.hpp"
#include "gbp/walksum.hpp"

namespace gbp {

inline constexpr double kPrecisionFloor = 1e-12;

/// Message state of synchronous Gaussian BP after round k. All vectors are
/// indexed by adjacency slot: slot s of node i describes the directed edge
/// (i -> model.slot(s).node).
///   agg_precision  a_{i->j}(k) = a_ii + sum_{v in N_i \ j} msg_precision_{v->i}(k-1)
///   agg_potential  b_{i->j}(k) = b_i  + sum_{v in N_i \ j} msg_potential_{v->i}(k-1)
///   msg_precision  -a_ij^2 / a_{i->j}(k)
///   msg_potential  -a_ij b_{i->j}(k) / a_{i->j}(k)
struct MessageState {
  std::size_t iteration = 0;
  std::vector<double> agg_precision;
  std::vector<double> agg_potential;
  std::vector<double> msg_precision;
  std::vector<double> msg_potential;

  friend bool operator==(const MessageState&, const MessageState&) = default;
};

struct Marginals {
  std::size_t iteration = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<char> valid;  // false where the precision sum is nonpositive
};

class NonpositivePrecision;

// Round 0: aggregates are the bare node parameters.
MessageState init(const GaussianModel& model);

// One flooding round. Throws NonpositivePrecision when an aggregate
// precision falls to kPrecisionFloor or below.
MessageState step(const GaussianModel& model, const MessageState& previous);

// Marginals at round k from the messages of round k-1.
Marginals marginals(const GaussianModel& model, const MessageState& previous);

// Round-0 marginals b_i / a_ii, 1 / a_ii (no messages received yet).
Marginals prior_marginals(const GaussianModel& model);

struct StoppingRule {
  std::size_t max_iterations = 500;
  double tol = 1e-12;  // on ||mu(k) - mu(k-1)||_inf
};

enum class StopReason { MaxIterations, Converged };

struct TrajectoryRecord {
  std::size_t k = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  std::optional<double> mse;
  // -infinity when mse is exactly 0.
  std::optional<double> log10_mse;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;  // k = 0, 1, ..., K
  std::optional<std::vector<double>> exact_mean;
  StopReason stop = StopReason::MaxIterations;

  std::size_t iterations() const {
    return records.empty() ? 0 : records.back().k;
  }
};

class NonpositivePrecision : public Error {
 public:
  NonpositivePrecision(NodeId from, NodeId to, std::size_t iteration,
                       double precision);
  NodeId from() const { return from_; }
  NodeId to() const { return to_; }
  std::size_t iteration() const { return iteration_; }
  double precision() const { return precision_; }
  // Records up to the failing round, attached by run().
  const std::optional<Trajectory>& partial() const { return partial_; }
  void attach(Trajectory partial) { partial_ = std::move(partial); }

 private:
  NodeId from_;
  NodeId to_;
  std::size_t iteration_;
  double precision_;
  std::optional<Trajectory> partial_;
};

// Iterates from round 0 until the stopping rule fires. The k = 0 record is
// the prior marginal; record k >= 1 uses the messages of round k-1.
Trajectory run(const GaussianModel& model,
               std::optional<std::span<const double>> exact_mean = std::nullopt,
               const StoppingRule& stop = {});

// mu(k) for a fixed number of rounds, without a stopping rule.
Marginals marginals_at(const GaussianModel& model, std::size_t k);

struct RateFit {
  double slope = 0.0;  // d log10(mse) / dk
  double intercept = 0.0;
  double r_squared = 0.0;
  double empirical_rate = 0.0;  // 10^(slope/2)
  std::size_t points = 0;
};

inline constexpr std::size_t kMinFitPoints = 5;

// Least-squares line through the last tail_fraction of the finite
// log10_mse points (at least kMinFitPoints of them). Throws
// InsufficientData when fewer than kMinFitPoints finite points exist.
RateFit fit_rate(const Trajectory& trajectory, double tail_fraction = 0.5);

struct BoundCheck {
  std::vector<char> holds;       // per record, in trajectory order
  std::vector<double> max_error; // max_i |mu~_i(k) - mu~_i|
  std::vector<double> bound;     // rho^k C + 1e-9
  bool all() const;
};

inline constexpr double kBoundSlack = 1e-9;

/// Mean-error bound |mu~_i(k) - mu~_i| <= rho^k C (+ kBoundSlack), evaluated
/// in normalized coordinates with rho the upper end of the spectral bracket.
/// The trajectory must come from running BP on the original model of
/// `model` with an exact mean supplied.
BoundCheck theorem1_check(const NormalizedModel& model,
                          const Trajectory& trajectory,
                          const WalkSummabilityReport& report);

}  // namespace gbp
