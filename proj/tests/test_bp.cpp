#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "gbp/bp.hpp"
#include "gbp/error.hpp"
#include "gbp/exact.hpp"
#include "gbp/walksum.hpp"
#include "oracles.hpp"

using namespace gbp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::size_t slot_of(const GaussianModel& g, NodeId i, NodeId j) {
  for (std::size_t s = g.slot_begin(i); s < g.slot_begin(i) + g.degree(i); ++s)
    if (g.slot(s).node == j) return s;
  throw std::logic_error("no such edge");
}

double sup_error(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST_CASE("initial messages", "[bp]") {
  const GaussianModel g = testing::two_node(0.5);
  const MessageState s = init(g);
  const std::size_t s12 = slot_of(g, 0, 1);
  CHECK(s.iteration == 0);
  CHECK(s.agg_precision[s12] == 1.0);
  CHECK(s.agg_potential[s12] == 1.0);
  CHECK(s.msg_precision[s12] == -0.25);
  CHECK(s.msg_potential[s12] == -0.5);

  CHECK(init(GaussianModel({1, 2}, {0, 0}, {})).msg_precision.empty());

  const GaussianModel fig = testing::loopy5_graph(-0.3);
  const MessageState f = init(fig);
  for (std::size_t t = 0; t < fig.slot_count(); ++t)
    CHECK(f.agg_precision[t] == fig.diag(fig.slot_owner(t)));
}

TEST_CASE("step on a leaf pair is stationary", "[bp]") {
  const GaussianModel g = testing::two_node(0.5);
  const MessageState s0 = init(g);
  const MessageState s1 = step(g, s0);
  CHECK(s1.iteration == 1);
  CHECK(s1.agg_precision == s0.agg_precision);
  CHECK(s1.msg_precision == s0.msg_precision);
  CHECK(s1.msg_potential == s0.msg_potential);
  const Marginals m = marginals(g, s0);
  CHECK(m.iteration == 1);
  CHECK_THAT(m.mean[0], WithinRel(2.0 / 3.0, 1e-15));
  CHECK_THAT(m.mean[1], WithinRel(2.0 / 3.0, 1e-15));
  CHECK_THAT(m.variance[0], WithinRel(4.0 / 3.0, 1e-15));
}

TEST_CASE("step aggregates exclude the target", "[bp]") {
  const GaussianModel path({1, 2, 3}, {1, 1, 1}, {{0, 1, -0.5}, {1, 2, 0.4}});
  const MessageState s0 = init(path);
  const MessageState s1 = step(path, s0);
  const std::size_t s23 = slot_of(path, 1, 2);
  const std::size_t s12 = slot_of(path, 0, 1);
  CHECK(s1.agg_precision[s23] == 2.0 + s0.msg_precision[s12]);
  CHECK(s1.agg_potential[s23] == 1.0 + s0.msg_potential[s12]);
  CHECK(s1.msg_precision[s23] == -(0.4 * 0.4) / s1.agg_precision[s23]);
}

TEST_CASE("edgeless marginals", "[bp]") {
  const GaussianModel g({2, 4}, {1, 3}, {});
  for (std::size_t k = 0; k < 4; ++k) {
    const Marginals m = marginals_at(g, k);
    CHECK(m.mean == std::vector<double>{0.5, 0.75});
    CHECK(m.variance == std::vector<double>{0.5, 0.25});
  }
  const Trajectory t = run(g);
  CHECK(t.iterations() == 1);
  CHECK(t.stop == StopReason::Converged);
  CHECK(t.records.size() == 2);
}

TEST_CASE("loopy graph converges to the exact mean", "[bp]") {
  const GaussianModel fig = testing::loopy5_graph(-0.2);
  const auto exact = solve(fig);
  const Trajectory t = run(fig, std::span<const double>(exact.mean));
  CHECK(t.stop == StopReason::Converged);
  CHECK(sup_error(t.records.back().mean, exact.mean) <= 1e-9);
  CHECK(t.records.back().mse.has_value());
}

TEST_CASE("BP is exact on trees after each node's eccentricity", "[bp][property]") {
  testing::Draws draws(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const GaussianModel tree = testing::random_tree(draws, 2 + draws.index(40));
    const auto exact = solve(tree);
    const std::size_t d = testing::diameter(tree);
    const Trajectory t = run(tree, std::span<const double>(exact.mean), {d + 10, 0.0});
    for (const auto& rec : t.records) {
      for (NodeId i = 0; i < tree.size(); ++i) {
        if (rec.k < testing::eccentricity(tree, i)) continue;
        CHECK_THAT(rec.mean[i], WithinAbs(exact.mean[i], 1e-12));
        CHECK_THAT(rec.variance[i], WithinAbs(exact.marginal_variances[i], 1e-12));
      }
    }
  }
}

TEST_CASE("runs are deterministic and restartable", "[bp]") {
  testing::Draws draws(6);
  const GaussianModel g = testing::walk_summable_graph(draws, 40, 0.1, 0.8);
  const Trajectory a = run(g);
  const Trajectory b = run(g);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    CHECK(a.records[r].mean == b.records[r].mean);
    CHECK(a.records[r].variance == b.records[r].variance);
  }

  // A copied checkpoint continues exactly like the original.
  MessageState s = init(g);
  for (int k = 0; k < 5; ++k) s = step(g, s);
  const MessageState checkpoint = s;
  MessageState resumed = checkpoint;
  for (int k = 0; k < 5; ++k) {
    s = step(g, s);
    resumed = step(g, resumed);
  }
  CHECK(s == resumed);
  CHECK(marginals(g, s).mean == marginals_at(g, 11).mean);
}

TEST_CASE("precision failure halts with the partial trajectory", "[bp]") {
  // Indefinite: eigenvalue 1 - 1.5 < 0.
  const GaussianModel bad = testing::triangle(1.5);
  try {
    run(bad);
    FAIL("expected NonpositivePrecision");
  } catch (const NonpositivePrecision& e) {
    CHECK(e.iteration() == 1);
    CHECK(e.precision() <= kPrecisionFloor);
    REQUIRE(e.partial());
    CHECK(e.partial()->records.size() == 2);  // k = 0 and k = 1
  }
  CHECK_THROWS_AS(step(bad, init(bad)), NonpositivePrecision);
}

TEST_CASE("rate fit on synthetic trajectories", "[bp]") {
  for (double r : {0.1, 0.3, 0.9}) {
    Trajectory t;
    for (std::size_t k = 0; k <= 40; ++k) {
      TrajectoryRecord rec;
      rec.k = k;
      rec.mse = std::pow(r, 2.0 * k) * 1e-2;
      rec.log10_mse = std::log10(*rec.mse);
      t.records.push_back(rec);
    }
    const RateFit fit = fit_rate(t);
    CHECK_THAT(fit.empirical_rate, WithinAbs(r, 1e-9));
    CHECK_THAT(fit.slope, WithinAbs(2 * std::log10(r), 1e-9));
    CHECK(fit.points == 21);
    CHECK(fit.r_squared > 0.999999);
  }

  // mse = 0.09^k: slope 2 log10(0.3).
  Trajectory g;
  for (std::size_t k = 0; k < 10; ++k) {
    TrajectoryRecord rec;
    rec.k = k;
    rec.log10_mse = k * std::log10(0.09);
    g.records.push_back(rec);
  }
  CHECK_THAT(fit_rate(g).empirical_rate, WithinAbs(0.3, 1e-12));
}

TEST_CASE("rate fit skips the -inf sentinel and needs five points", "[bp]") {
  Trajectory t;
  for (std::size_t k = 0; k < 8; ++k) {
    TrajectoryRecord rec;
    rec.k = k;
    rec.log10_mse = k < 4 ? -double(k) : -std::numeric_limits<double>::infinity();
    t.records.push_back(rec);
  }
  CHECK_THROWS_AS(fit_rate(t), InsufficientData);
  t.records[4].log10_mse = -4.0;
  const RateFit fit = fit_rate(t);
  CHECK(fit.points == 5);
  CHECK_THAT(fit.slope, WithinAbs(-1.0, 1e-12));
}

TEST_CASE("reported slopes convert to the reported rates", "[bp]") {
  CHECK_THAT(std::pow(10.0, -1.0502 / 2), WithinAbs(0.2985, 5e-5));
  CHECK_THAT(std::pow(10.0, -1.0642 / 2), WithinAbs(0.2937, 5e-5));
}

TEST_CASE("mean error bound on small instances", "[bp]") {
  SECTION("edgeless") {
    const GaussianModel g({1, 1}, {2, 3}, {});
    const NormalizedModel nm = normalize(g);
    const auto t = run(g, std::span<const double>(solve(g).mean));
    const auto check = theorem1_check(nm, t, analyze(nm));
    CHECK(check.all());
    CHECK(check.max_error.back() == 0.0);
  }
  SECTION("two nodes") {
    const GaussianModel g = testing::two_node(0.5);
    const NormalizedModel nm = normalize(g);
    const auto exact = solve(g);
    const auto t = run(g, std::span<const double>(exact.mean));
    const auto check = theorem1_check(nm, t, analyze(nm));
    CHECK(check.all());
    for (std::size_t r = 1; r < t.records.size(); ++r)
      CHECK(check.max_error[r] <= 1e-15);
  }
  SECTION("triangle") {
    const GaussianModel g = testing::triangle(0.3, {1, 2, 3});
    const NormalizedModel nm = normalize(g);
    const auto exact = solve(g);
    const auto t = run(g, std::span<const double>(exact.mean), {60, 0.0});
    REQUIRE(t.iterations() == 60);
    const auto check = theorem1_check(nm, t, analyze(nm));
    CHECK(check.all());
  }
  SECTION("requires walk summability") {
    const GaussianModel g = testing::two_node(1.0);
    const NormalizedModel nm = normalize(g);
    Trajectory t;
    t.exact_mean = std::vector<double>{0, 0};
    CHECK_THROWS_AS(theorem1_check(nm, t, analyze(nm)), NotWalkSummable);
  }
}

TEST_CASE("bound holds in normalized coordinates for scaled models", "[bp]") {
  testing::Draws draws(31);
  for (int trial = 0; trial < 10; ++trial) {
    GaussianModel g = testing::walk_summable_graph(draws, 15, 0.3, 0.85);
    std::vector<double> diag(g.size());
    for (auto& d : diag) d = draws.uniform(0.2, 5.0);
    // Congruence by sqrt(diag) keeps rho(|R|) unchanged.
    std::vector<double> couplings;
    for (const Edge& e : g.edges())
      couplings.push_back(e.coupling * std::sqrt(diag[e.i] * diag[e.j]));
    g = g.with_values(diag, {g.potentials().begin(), g.potentials().end()}, couplings);
    const NormalizedModel nm = normalize(g);
    const auto report = analyze(nm);
    REQUIRE(report.walk_summable);
    const auto t = run(g, std::span<const double>(solve(g).mean));
    CHECK(theorem1_check(nm, t, report).all());
  }
}

TEST_CASE("walk-summable runs converge within the predicted horizon", "[bp][property]") {
  testing::Draws draws(555);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + draws.index(199);
    const GaussianModel g = testing::walk_summable_graph(
        draws, n, std::min(1.0, 4.0 / n), draws.uniform(0.1, 0.9));
    const NormalizedModel nm = normalize(g);
    const auto report = analyze(nm);
    REQUIRE(report.walk_summable);
    const auto exact = solve(g);
    const auto t = run(g, std::span<const double>(exact.mean));
    for (const auto& rec : t.records)
      for (double v : rec.variance) CHECK(v > 0.0);

    const double c = *report.theorem1_c;
    std::size_t horizon = 0;
    if (c > 1e-8 && report.rho_bar > 0.0)
      horizon = static_cast<std::size_t>(
          std::ceil(std::log(1e-8 / c) / std::log(report.rho_upper())));
    const std::size_t limit = horizon + 5;
    bool reached = false;
    for (const auto& rec : t.records) {
      if (rec.k > limit) break;
      reached = reached || sup_error(rec.mean, exact.mean) < 1e-8;
    }
    CHECK(reached);
  }
}
