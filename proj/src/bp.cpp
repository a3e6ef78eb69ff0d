#include "gbp/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gbp {

NonpositivePrecision::NonpositivePrecision(NodeId from, NodeId to,
                                           std::size_t iteration,
                                           double precision)
    : Error("nonpositive message precision " + std::to_string(precision) +
            " on edge " + std::to_string(from + 1) + "->" +
            std::to_string(to + 1) + " at iteration " +
            std::to_string(iteration)),
      from_(from),
      to_(to),
      iteration_(iteration),
      precision_(precision) {}

namespace {

void emit_messages(const GaussianModel& model, MessageState& state) {
  const std::size_t slots = model.slot_count();
  state.msg_precision.resize(slots);
  state.msg_potential.resize(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    const double c = model.slot(s).coupling;
    state.msg_precision[s] = -c * c / state.agg_precision[s];
    state.msg_potential[s] = -c * state.agg_potential[s] / state.agg_precision[s];
  }
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - b[i]);
    if (std::isnan(diff)) return std::numeric_limits<double>::infinity();
    d = std::max(d, diff);
  }
  return d;
}

void score(TrajectoryRecord& rec, std::span<const double> exact) {
  double sum = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double e = rec.mean[i] - exact[i];
    sum += e * e;
  }
  rec.mse = sum / static_cast<double>(exact.size());
  rec.log10_mse = *rec.mse == 0.0 ? -std::numeric_limits<double>::infinity()
                                  : std::log10(*rec.mse);
}

}  // namespace

MessageState init(const GaussianModel& model) {
  require_valid(model);
  MessageState state;
  state.agg_precision.resize(model.slot_count());
  state.agg_potential.resize(model.slot_count());
  for (std::size_t s = 0; s < model.slot_count(); ++s) {
    const NodeId i = model.slot_owner(s);
    state.agg_precision[s] = model.diag(i);
    state.agg_potential[s] = model.potential(i);
  }
  emit_messages(model, state);
  return state;
}

MessageState step(const GaussianModel& model, const MessageState& previous) {
  MessageState next;
  next.iteration = previous.iteration + 1;
  next.agg_precision.resize(model.slot_count());
  next.agg_potential.resize(model.slot_count());
  for (NodeId i = 0; i < model.size(); ++i) {
    const std::size_t begin = model.slot_begin(i);
    const std::size_t end = begin + model.degree(i);
    for (std::size_t s = begin; s < end; ++s) {
      double precision = model.diag(i);
      double potential = model.potential(i);
      // Incoming v -> i lives in the reverse slot of (i -> v).
      for (std::size_t t = begin; t < end; ++t) {
        if (t == s) continue;
        const std::size_t in = model.slot(t).reverse;
        precision += previous.msg_precision[in];
        potential += previous.msg_potential[in];
      }
      if (!(precision > kPrecisionFloor))
        throw NonpositivePrecision(i, model.slot(s).node, next.iteration,
                                   precision);
      next.agg_precision[s] = precision;
      next.agg_potential[s] = potential;
    }
  }
  emit_messages(model, next);
  return next;
}

Marginals marginals(const GaussianModel& model, const MessageState& previous) {
  const std::size_t n = model.size();
  Marginals m;
  m.iteration = previous.iteration + 1;
  m.mean.resize(n);
  m.variance.resize(n);
  m.valid.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    double precision = model.diag(i);
    double potential = model.potential(i);
    const std::size_t begin = model.slot_begin(i);
    for (std::size_t t = begin; t < begin + model.degree(i); ++t) {
      const std::size_t in = model.slot(t).reverse;
      precision += previous.msg_precision[in];
      potential += previous.msg_potential[in];
    }
    m.valid[i] = precision > 0.0;
    if (m.valid[i]) {
      m.mean[i] = potential / precision;
      m.variance[i] = 1.0 / precision;
    } else {
      m.mean[i] = std::numeric_limits<double>::quiet_NaN();
      m.variance[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return m;
}

Marginals prior_marginals(const GaussianModel& model) {
  const std::size_t n = model.size();
  Marginals m;
  m.mean.resize(n);
  m.variance.resize(n);
  m.valid.assign(n, 1);
  for (NodeId i = 0; i < n; ++i) {
    m.mean[i] = model.potential(i) / model.diag(i);
    m.variance[i] = 1.0 / model.diag(i);
  }
  return m;
}

Trajectory run(const GaussianModel& model,
               std::optional<std::span<const double>> exact_mean,
               const StoppingRule& stop) {
  require_valid(model);
  if (exact_mean && exact_mean->size() != model.size())
    throw Error("exact mean has " + std::to_string(exact_mean->size()) +
                " entries for " + std::to_string(model.size()) + " nodes");

  Trajectory traj;
  if (exact_mean)
    traj.exact_mean.emplace(exact_mean->begin(), exact_mean->end());

  auto record = [&](Marginals&& m) {
    TrajectoryRecord rec;
    rec.k = m.iteration;
    rec.mean = std::move(m.mean);
    rec.variance = std::move(m.variance);
    if (exact_mean) score(rec, *exact_mean);
    traj.records.push_back(std::move(rec));
  };

  record(prior_marginals(model));
  if (stop.max_iterations == 0) return traj;

  MessageState state = init(model);
  for (std::size_t k = 1;; ++k) {
    record(marginals(model, state));
    const auto& cur = traj.records[traj.records.size() - 1].mean;
    const auto& prev = traj.records[traj.records.size() - 2].mean;
    if (sup_distance(cur, prev) < stop.tol) {
      traj.stop = StopReason::Converged;
      break;
    }
    if (k >= stop.max_iterations) break;
    try {
      state = step(model, state);
    } catch (NonpositivePrecision& e) {
      e.attach(std::move(traj));
      throw;
    }
  }
  return traj;
}

Marginals marginals_at(const GaussianModel& model, std::size_t k) {
  if (k == 0) return prior_marginals(model);
  MessageState state = init(model);
  for (std::size_t r = 1; r < k; ++r) state = step(model, state);
  return marginals(model, state);
}

RateFit fit_rate(const Trajectory& trajectory, double tail_fraction) {
  std::vector<std::pair<double, double>> points;
  for (const auto& rec : trajectory.records)
    if (rec.log10_mse && std::isfinite(*rec.log10_mse))
      points.emplace_back(static_cast<double>(rec.k), *rec.log10_mse);
  if (points.size() < kMinFitPoints)
    throw InsufficientData("rate fit needs at least " +
                           std::to_string(kMinFitPoints) +
                           " finite log10(mse) points, have " +
                           std::to_string(points.size()));

  const auto wanted = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(points.size())));
  const std::size_t count =
      std::min(points.size(), std::max(kMinFitPoints, wanted));
  const std::span<const std::pair<double, double>> tail(
      points.data() + points.size() - count, count);

  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : tail) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : tail) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }

  RateFit fit;
  fit.points = count;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : tail) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.empirical_rate = std::pow(10.0, fit.slope / 2.0);
  return fit;
}

bool BoundCheck::all() const {
  return std::all_of(holds.begin(), holds.end(), [](char h) { return h != 0; });
}

BoundCheck theorem1_check(const NormalizedModel& model,
                          const Trajectory& trajectory,
                          const WalkSummabilityReport& report) {
  if (!report.walk_summable || !report.theorem1_c)
    throw NotWalkSummable("error bound requires a walk-summable model");
  if (!trajectory.exact_mean)
    throw Error("error bound check needs a trajectory with an exact mean");

  const std::vector<double> exact = model.normalize_mean(*trajectory.exact_mean);
  const double rho = report.rho_upper();
  const double c = *report.theorem1_c;

  BoundCheck out;
  for (const auto& rec : trajectory.records) {
    const std::vector<double> mean = model.normalize_mean(rec.mean);
    double worst = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double e = std::abs(mean[i] - exact[i]);
      worst = std::isnan(e) ? std::numeric_limits<double>::infinity()
                            : std::max(worst, e);
    }
    const double bound =
        std::pow(rho, static_cast<double>(rec.k)) * c + kBoundSlack;
    out.max_error.push_back(worst);
    out.bound.push_back(bound);
    out.holds.push_back(worst <= bound);
  }
  return out;
}

}  // namespace gbp
