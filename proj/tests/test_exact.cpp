#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gbp/error.hpp"
#include "gbp/exact.hpp"
#include "gbp/generator.hpp"
#include "oracles.hpp"

using namespace gbp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("scalar solve", "[exact]") {
  const auto sol = solve(GaussianModel({2.0}, {6.0}, {}), true);
  CHECK(sol.mean[0] == 3.0);
  CHECK(sol.marginal_variances[0] == 0.5);
  REQUIRE(sol.full_covariance);
  CHECK((*sol.full_covariance)(0, 0) == 0.5);
}

TEST_CASE("two-node closed form", "[exact]") {
  // A^-1 = 1/(1 - r^2) [[1, -r], [-r, 1]] with r = 0.5.
  const auto sol = solve(testing::two_node(0.5), true);
  CHECK_THAT(sol.mean[0], WithinRel(2.0 / 3.0, 1e-15));
  CHECK_THAT(sol.mean[1], WithinRel(2.0 / 3.0, 1e-15));
  CHECK_THAT(sol.marginal_variances[0], WithinRel(4.0 / 3.0, 1e-15));
  CHECK_THAT((*sol.full_covariance)(0, 1), WithinRel(-2.0 / 3.0, 1e-15));
}

TEST_CASE("residual on a generated 13-node instance", "[exact]") {
  GeneratorSpec spec = *preset("paper13");
  spec.seed = 21;
  const GaussianModel g = generate(spec).model;
  const auto sol = solve(g, true);
  const Eigen::MatrixXd a = dense_information(g);
  Eigen::VectorXd b(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) b[i] = g.potential(i);
  const Eigen::Map<const Eigen::VectorXd> mu(sol.mean.data(), g.size());
  CHECK((a * mu - b).lpNorm<Eigen::Infinity>() <=
        1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>()));

  const Eigen::MatrixXd& p = *sol.full_covariance;
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(sol.marginal_variances[i] > 0);
}

TEST_CASE("dense and sparse factorizations agree with a QR oracle", "[exact]") {
  testing::Draws draws(5);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianModel g =
        testing::walk_summable_graph(draws, 5 + draws.index(40), 0.15, 0.8);
    const auto oracle = testing::dense_moments(g);
    const auto dense = solve(g, false);
    const auto sparse = solve(g, false, /*dense_limit=*/0);
    CHECK_FALSE(sparse.full_covariance);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK_THAT(dense.mean[i], WithinAbs(oracle.mean[i], 1e-10));
      CHECK_THAT(sparse.mean[i], WithinAbs(oracle.mean[i], 1e-10));
      CHECK_THAT(dense.marginal_variances[i],
                 WithinRel(oracle.covariance(i, i), 1e-10));
      CHECK_THAT(sparse.marginal_variances[i],
                 WithinRel(oracle.covariance(i, i), 1e-10));
    }
  }
}

TEST_CASE("indefinite information matrix is rejected", "[exact]") {
  // Eigenvalues 1 +/- 2.
  const GaussianModel g = testing::two_node(2.0);
  CHECK_THROWS_AS(solve(g), NotPositiveDefinite);
  CHECK_THROWS_AS(solve(g, false, 0), NotPositiveDefinite);
  CHECK_THROWS_AS(solve_tree(g), NotPositiveDefinite);
  // Singular: eigenvalue exactly 0.
  CHECK_THROWS_AS(solve(testing::two_node(1.0)), NotPositiveDefinite);
}

TEST_CASE("tree elimination on a path", "[exact]") {
  const GaussianModel path({1, 1, 1}, {1, 1, 1}, {{0, 1, -0.5}, {1, 2, -0.5}});
  const auto a = solve(path);
  const auto t = solve_tree(path);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK_THAT(t.mean[i], WithinRel(a.mean[i], 1e-12));
    CHECK_THAT(t.marginal_variances[i], WithinRel(a.marginal_variances[i], 1e-12));
  }
}

TEST_CASE("tree elimination on a star and a singleton", "[exact]") {
  const GaussianModel star({1, 1, 1, 1, 1}, {1, 1, 1, 1, 1},
                           {{0, 1, 0.2}, {0, 2, 0.2}, {0, 3, 0.2}, {0, 4, 0.2}});
  const auto a = solve(star);
  const auto t = solve_tree(star, true);
  REQUIRE(t.full_covariance);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK_THAT(t.mean[i], WithinRel(a.mean[i], 1e-12));
    CHECK_THAT(t.marginal_variances[i], WithinRel(a.marginal_variances[i], 1e-12));
  }
  const auto single = solve_tree(GaussianModel({4.0}, {2.0}, {}));
  CHECK(single.mean[0] == 0.5);
  CHECK(solve_tree_root(star, 0).mean == Catch::Approx(a.mean[0]).epsilon(1e-12));
}

TEST_CASE("tree and dense solvers agree on random forests", "[exact][property]") {
  testing::Draws draws(17);
  for (int trial = 0; trial < 50; ++trial) {
    GaussianModel tree = testing::random_tree(draws, 1 + draws.index(60));
    // Drop one edge half the time to get a forest.
    if (trial % 2 && tree.edge_count() > 0) {
      std::vector<Edge> edges(tree.edges().begin(), tree.edges().end());
      edges.erase(edges.begin() + draws.index(edges.size()));
      tree = GaussianModel({tree.diag().begin(), tree.diag().end()},
                           {tree.potentials().begin(), tree.potentials().end()},
                           std::move(edges));
    }
    const auto a = solve(tree);
    const auto t = solve_tree(tree);
    for (std::size_t i = 0; i < tree.size(); ++i) {
      CHECK_THAT(t.mean[i], WithinRel(a.mean[i], 1e-12) || WithinAbs(a.mean[i], 1e-12));
      CHECK_THAT(t.marginal_variances[i], WithinRel(a.marginal_variances[i], 1e-12));
    }
  }
}

TEST_CASE("tree solver rejects cycles", "[exact]") {
  CHECK_THROWS_AS(solve_tree(testing::triangle(0.2)), NotATree);
  CHECK_THROWS_AS(solve_tree(testing::loopy5_graph()), NotATree);
  CHECK_THROWS_AS(solve_tree_root(testing::triangle(0.2), 1), NotATree);
}
