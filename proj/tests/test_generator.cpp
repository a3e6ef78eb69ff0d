#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gbp/error.hpp"
#include "gbp/experiment.hpp"
#include "gbp/generator.hpp"
#include "gbp/walksum.hpp"

using namespace gbp;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gbp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("rng derived draws", "[generator]") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform01());
  }
  Rng c(1);
  for (int i = 0; i < 1000; ++i) CHECK(c.uniform_index(7) < 7);
  // First output of mt19937_64 seeded with 5489 is 14514284786278117030.
  Rng d(5489);
  CHECK(d.uniform01() == double(14514284786278117030ull >> 11) * 0x1.0p-53);
}

TEST_CASE("presets", "[generator]") {
  const auto p13 = preset("paper13");
  REQUIRE(p13);
  CHECK(p13->nodes == 13);
  CHECK(p13->max_degree == 5);
  CHECK(p13->coupling == 0.26);
  const auto p1000 = preset("paper1000");
  REQUIRE(p1000);
  CHECK(p1000->nodes == 1000);
  CHECK(p1000->max_degree == 6);
  CHECK(p1000->coupling == 0.165);
  CHECK_FALSE(preset("nope"));
}

TEST_CASE("generated models respect the spec", "[generator][property]") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    GeneratorSpec spec;
    spec.nodes = 1 + seed % 30;
    spec.max_degree = 1 + seed % 6;
    spec.coupling = 0.05 + 0.01 * double(seed % 20);
    spec.seed = seed;
    const Generated gen = generate(spec);
    const GaussianModel& g = gen.model;
    REQUIRE(g.size() == spec.nodes);
    CHECK(validate(g).empty());
    for (NodeId i = 0; i < g.size(); ++i) {
      CHECK(g.diag(i) == 1.0);
      CHECK(g.potential(i) == double(i + 1));
      CHECK(g.degree(i) <= spec.max_degree);
    }
    for (const Edge& e : g.edges()) {
      CHECK(e.i < e.j);
      CHECK(e.coupling != 0.0);
      CHECK(e.coupling > -spec.coupling);
      CHECK(e.coupling < spec.coupling);
    }
    CHECK(analyze(normalize(g)).walk_summable);

    const Generated again = generate(spec);
    CHECK(again.model == g);
    CHECK(again.attempts == gen.attempts);
  }
}

TEST_CASE("seeds give distinct models", "[generator]") {
  GeneratorSpec spec = *preset("paper13");
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    seen.insert(format_model(generate(spec).model));
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("singleton and degenerate specs", "[generator]") {
  GeneratorSpec spec;
  spec.nodes = 1;
  spec.seed = 3;
  const GaussianModel g = generate(spec).model;
  CHECK(g.size() == 1);
  CHECK(g.edge_count() == 0);
  CHECK(g.potential(0) == 1.0);

  spec.nodes = 10;
  spec.max_degree = 0;
  CHECK(generate(spec).model.edge_count() == 0);
}

TEST_CASE("unsatisfiable walk-summability", "[generator]") {
  GeneratorSpec spec;
  spec.nodes = 40;
  spec.max_degree = 8;
  spec.coupling = 5.0;
  spec.seed = 1;
  CHECK_THROWS_AS(generate(spec), Unsatisfiable);
  spec.require_walk_summable = false;
  const Generated gen = generate(spec);
  CHECK(gen.attempts == 1);
  CHECK_FALSE(analyze(normalize(gen.model)).walk_summable);
}

TEST_CASE("trajectory csv", "[experiment]") {
  Trajectory t;
  t.exact_mean = std::vector<double>{1.0, 2.0};
  t.records.push_back({0, {0.5, 1.5}, {1, 1}, 0.25, std::log10(0.25)});
  t.records.push_back({1, {1.0, 2.0}, {1, 1}, 0.0,
                       -std::numeric_limits<double>::infinity()});
  CHECK(format_trajectory_csv(t) ==
        "k,mse,log10_mse\n0,0.25,-0.6020599913279624\n1,0,-inf\n");
  CHECK(format_trajectory_csv(t, true) ==
        "k,mse,log10_mse,mu_1,mu_2\n0,0.25,-0.6020599913279624,0.5,1.5\n"
        "1,0,-inf,1,2\n");

  Trajectory bare;
  bare.records.push_back({0, {3.0}, {1.0}, std::nullopt, std::nullopt});
  CHECK(format_trajectory_csv(bare, true) == "k,mse,log10_mse,mu_1\n0,,,3\n");
}

TEST_CASE("error plot is deterministic svg", "[experiment]") {
  Trajectory t;
  for (std::size_t k = 0; k < 20; ++k) {
    const double mse = std::pow(10.0, -0.5 * double(k));
    t.records.push_back({k, {0.0}, {1.0}, mse, std::log10(mse)});
  }
  const std::string svg = render_error_svg(t, "demo");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK_THAT(svg, ContainsSubstring("Iteration k"));
  CHECK_THAT(svg, ContainsSubstring("log10"));
  CHECK_THAT(svg, ContainsSubstring("<polyline"));
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(render_error_svg(t, "demo") == svg);
}

TEST_CASE("experiment writes reproducible artifacts", "[experiment]") {
  ExperimentOptions opt;
  opt.spec = *preset("paper13");
  opt.spec.seed = 7;
  opt.preset_name = "paper13";
  opt.svg = true;

  opt.out_dir = scratch("exp_a");
  const ExperimentReport a = run_experiment(opt);
  opt.out_dir = scratch("exp_b");
  const ExperimentReport b = run_experiment(opt);

  CHECK(a.walk_summable);
  CHECK(a.bound_satisfied);
  REQUIRE(a.fit);
  CHECK(a.fit->r_squared >= 0.98);
  CHECK(a.empirical_rate() <= a.rho_bar + 0.05);
  CHECK(a.model_file == "model.json");
  CHECK(a.trajectory_file == "trajectory.csv");
  REQUIRE(a.svg_file);

  const auto tmp = std::filesystem::temp_directory_path();
  for (const char* f : {"model.json", "trajectory.csv", "report.json", "log_error.svg"}) {
    const std::string fa = slurp(tmp / "gbp_test_exp_a" / f);
    CHECK_FALSE(fa.empty());
    CHECK(fa == slurp(tmp / "gbp_test_exp_b" / f));
  }
  CHECK(format_report(a) == format_report(b));
  CHECK(load_model(tmp / "gbp_test_exp_b" / "model.json") == generate(opt.spec).model);
}
