#include "gbp/generator.hpp"

#include <set>
#include <utility>
#include <vector>

#include "gbp/error.hpp"
#include "gbp/walksum.hpp"

namespace gbp {

std::optional<GeneratorSpec> preset(std::string_view name) {
  if (name == "paper13") return GeneratorSpec{13, 5, 0.26, 0, true};
  if (name == "paper1000") return GeneratorSpec{1000, 6, 0.165, 0, true};
  return std::nullopt;
}

namespace {

double draw_coupling(Rng& rng, double c) {
  for (;;) {
    const double a = c * (2.0 * rng.uniform01() - 1.0);
    if (a != 0.0 && a > -c) return a;
  }
}

GaussianModel draw_model(const GeneratorSpec& spec, Rng& rng) {
  const std::size_t n = spec.nodes;
  std::vector<std::size_t> degree(n, 0);
  std::set<std::pair<NodeId, NodeId>> present;
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (std::size_t attempt = 0;
         attempt < 4 * spec.max_degree && degree[i] < spec.max_degree;
         ++attempt) {
      const NodeId j = rng.uniform_index(n);
      if (j == i || degree[j] >= spec.max_degree) continue;
      if (!present.insert(std::minmax(i, j)).second) continue;
      edges.push_back({std::min(i, j), std::max(i, j),
                       draw_coupling(rng, spec.coupling)});
      ++degree[i];
      ++degree[j];
    }
  }
  std::vector<double> potentials(n);
  for (std::size_t i = 0; i < n; ++i) potentials[i] = static_cast<double>(i + 1);
  return GaussianModel(std::vector<double>(n, 1.0), std::move(potentials),
                       std::move(edges));
}

}  // namespace

Generated generate(const GeneratorSpec& spec) {
  if (spec.nodes == 0) throw Error("generator needs at least one node");
  if (!(spec.coupling > 0.0)) throw Error("coupling range must be positive");
  Rng rng(spec.seed);
  for (std::size_t attempt = 1; attempt <= kRegenerationAttempts; ++attempt) {
    GaussianModel model = draw_model(spec, rng);
    if (!spec.require_walk_summable || analyze(normalize(model)).walk_summable)
      return {std::move(model), attempt};
  }
  throw Unsatisfiable("no walk-summable model in " +
                      std::to_string(kRegenerationAttempts) +
                      " attempts (n=" + std::to_string(spec.nodes) +
                      ", max degree " + std::to_string(spec.max_degree) +
                      ", coupling " + std::to_string(spec.coupling) + ")");
}

}  // namespace gbp
