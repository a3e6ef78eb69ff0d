#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gbp {

// Node indices are 0-based in the library API. Files and CLI output use
// 1-based ids.
using NodeId = std::size_t;

struct Edge {
  NodeId i;
  NodeId j;
  double coupling;  // a_ij = a_ji
};

// One row entry of the adjacency structure: the directed edge (i -> neighbor).
struct Neighbor {
  NodeId node;
  double coupling;
  std::size_t reverse;  // slot of (neighbor -> i)
};

/// Gaussian graphical model in information form,
///   p(x) ~ exp(-x'Ax/2 + b'x),
/// with the diagonal of A, the potential vector b and one coupling per
/// undirected edge. A model may be constructed in an invalid state so that
/// validate() can report on it; every other operation requires validity.
class GaussianModel {
 public:
  GaussianModel() = default;
  GaussianModel(std::vector<double> diag, std::vector<double> potentials,
                std::vector<Edge> edges);

  std::size_t size() const { return diag_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  // Number of directed edges, i.e. adjacency slots.
  std::size_t slot_count() const { return slots_.size(); }

  double diag(NodeId i) const { return diag_[i]; }
  double potential(NodeId i) const { return potentials_[i]; }
  std::span<const double> diag() const { return diag_; }
  std::span<const double> potentials() const { return potentials_; }
  std::span<const Edge> edges() const { return edges_; }

  // Neighbors of i in ascending id order. Slot indices are
  // slot_begin(i) + position.
  std::span<const Neighbor> neighbors(NodeId i) const;
  std::size_t slot_begin(NodeId i) const { return offsets_[i]; }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
  const Neighbor& slot(std::size_t s) const { return slots_[s]; }
  // Node owning slot s (the tail of the directed edge).
  NodeId slot_owner(std::size_t s) const { return owners_[s]; }

  // a_ij, or 0 when {i, j} is not an edge.
  double coupling(NodeId i, NodeId j) const;

  // Same graph, different numbers. Used by normalization and tree copies.
  GaussianModel with_values(std::vector<double> diag,
                            std::vector<double> potentials,
                            std::vector<double> couplings) const;

  friend bool operator==(const GaussianModel& a, const GaussianModel& b);

 private:
  std::vector<double> diag_;
  std::vector<double> potentials_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> slots_;
  std::vector<NodeId> owners_;
};

bool operator==(const Edge& a, const Edge& b);

// Every violated invariant, in 1-based node terms. Empty means valid.
std::vector<std::string> validate(const GaussianModel& model);

// Throws ValidationError when validate() is nonempty.
void require_valid(const GaussianModel& model);

/// Unit-diagonal congruent form A~ = D^-1/2 A D^-1/2, b~ = D^-1/2 b where
/// D = diag(a_ii). `scale` keeps the original diagonal.
struct NormalizedModel {
  GaussianModel base;
  std::vector<double> scale;

  // mu_i = mu~_i / sqrt(delta_i)
  std::vector<double> denormalize_mean(std::span<const double> mean) const;
  // p_ii = p~_ii / delta_i
  std::vector<double> denormalize_variance(
      std::span<const double> variance) const;
  std::vector<double> normalize_mean(std::span<const double> mean) const;
};

NormalizedModel normalize(const GaussianModel& model);

// Canonical JSON model format:
//   {"nodes": [{"id": 1, "a": ..., "b": ...}, ...],
//    "edges": [{"i": 1, "j": 2, "a": ...}, ...]}
GaussianModel parse_model(std::string_view text);
std::string format_model(const GaussianModel& model);

GaussianModel load_model(const std::filesystem::path& path);
void save_model(const GaussianModel& model, const std::filesystem::path& path);

}  // namespace gbp
