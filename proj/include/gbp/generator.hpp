#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "gbp/model.hpp"

namespace gbp {

// mt19937_64 stream with portable derived draws: uniform01 takes the top 53
// bits of one output, uniform_index scales uniform01. Both are reproducible
// in any language that ships the same Mersenne Twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t uniform_index(std::size_t n) {
    const auto k =
        static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

struct GeneratorSpec {
  std::size_t nodes = 13;
  std::size_t max_degree = 5;
  double coupling = 0.26;  // couplings drawn from (-coupling, coupling)
  std::uint64_t seed = 0;
  bool require_walk_summable = true;
};

inline constexpr std::size_t kRegenerationAttempts = 100;

// Named parameter sets: "paper13" (13 nodes, degree <= 5, c = 0.26) and
// "paper1000" (1000 nodes, degree <= 6, c = 0.165).
std::optional<GeneratorSpec> preset(std::string_view name);

struct Generated {
  GaussianModel model;
  std::size_t attempts = 1;
};

/// Random degree-capped model with a_ii = 1 and b_i = i (1-based).
///
/// Nodes are visited in order. Node i draws up to 4 * max_degree candidate
/// neighbors uniformly from all nodes and links every candidate that is not
/// itself, not already adjacent, and below the cap, until i is full. Each
/// new edge draws its coupling as c * (2u - 1), redrawn while it is 0 or -c.
/// With require_walk_summable the whole model is redrawn from the same
/// stream until rho(|R|) < 1, at most kRegenerationAttempts times, after
/// which Unsatisfiable is thrown.
Generated generate(const GeneratorSpec& spec);

}  // namespace gbp
