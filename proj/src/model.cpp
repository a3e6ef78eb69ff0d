#include "gbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "gbp/error.hpp"

namespace gbp {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::string edge_name(NodeId i, NodeId j) {
  return "{" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "}";
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("invalid model: " + join(violations)),
      violations_(std::move(violations)) {}

NonpositiveDiagonal::NonpositiveDiagonal(std::size_t node, double value)
    : Error("nonpositive diagonal at node " + std::to_string(node + 1) + " (" +
            std::to_string(value) + ")"),
      node_(node) {}

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot_index, double pivot)
    : Error("information matrix is not positive definite (pivot " +
            std::to_string(pivot) + " at elimination step " +
            std::to_string(pivot_index + 1) + ")"),
      pivot_index_(pivot_index),
      pivot_(pivot) {}

DidNotConverge::DidNotConverge(std::size_t iterations, double lower,
                               double upper)
    : Error("power iteration did not converge after " +
            std::to_string(iterations) + " iterations; bracket [" +
            std::to_string(lower) + ", " + std::to_string(upper) + "]"),
      iterations_(iterations),
      lower_(lower),
      upper_(upper) {}

GaussianModel::GaussianModel(std::vector<double> diag,
                             std::vector<double> potentials,
                             std::vector<Edge> edges)
    : diag_(std::move(diag)),
      potentials_(std::move(potentials)),
      edges_(std::move(edges)) {
  const std::size_t n = diag_.size();
  struct Entry {
    NodeId from;
    NodeId to;
    double coupling;
    std::size_t edge;
  };
  std::vector<Entry> entries;
  entries.reserve(2 * edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.i >= n || edge.j >= n || edge.i == edge.j) continue;
    entries.push_back({edge.i, edge.j, edge.coupling, e});
    entries.push_back({edge.j, edge.i, edge.coupling, e});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& x, const Entry& y) {
                     return std::pair(x.from, x.to) < std::pair(y.from, y.to);
                   });

  offsets_.assign(n + 1, 0);
  for (const auto& en : entries) ++offsets_[en.from + 1];
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];

  slots_.resize(entries.size());
  owners_.resize(entries.size());
  // Each undirected edge owns exactly two slots; pair them through the edge
  // index.
  std::vector<std::size_t> first_slot(edges_.size(), entries.size());
  for (std::size_t s = 0; s < entries.size(); ++s) {
    slots_[s] = {entries[s].to, entries[s].coupling, s};
    owners_[s] = entries[s].from;
    auto& other = first_slot[entries[s].edge];
    if (other == entries.size()) {
      other = s;
    } else {
      slots_[s].reverse = other;
      slots_[other].reverse = s;
    }
  }
}

std::span<const Neighbor> GaussianModel::neighbors(NodeId i) const {
  return std::span<const Neighbor>(slots_).subspan(offsets_[i], degree(i));
}

double GaussianModel::coupling(NodeId i, NodeId j) const {
  auto row = neighbors(i);
  auto it = std::lower_bound(
      row.begin(), row.end(), j,
      [](const Neighbor& nb, NodeId id) { return nb.node < id; });
  if (it != row.end() && it->node == j) return it->coupling;
  return 0.0;
}

GaussianModel GaussianModel::with_values(std::vector<double> diag,
                                         std::vector<double> potentials,
                                         std::vector<double> couplings) const {
  std::vector<Edge> edges = edges_;
  for (std::size_t e = 0; e < edges.size(); ++e)
    edges[e].coupling = couplings[e];
  return GaussianModel(std::move(diag), std::move(potentials),
                       std::move(edges));
}

bool operator==(const Edge& a, const Edge& b) {
  return a.i == b.i && a.j == b.j && a.coupling == b.coupling;
}

bool operator==(const GaussianModel& a, const GaussianModel& b) {
  return a.diag_ == b.diag_ && a.potentials_ == b.potentials_ &&
         a.edges_ == b.edges_;
}

std::vector<std::string> validate(const GaussianModel& model) {
  std::vector<std::string> report;
  const std::size_t n = model.size();
  if (n == 0) report.emplace_back("model has no nodes");
  if (model.potentials().size() != n) {
    report.emplace_back("potential vector has " +
                        std::to_string(model.potentials().size()) +
                        " entries for " + std::to_string(n) + " nodes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double a = model.diag(i);
    if (!std::isfinite(a)) {
      report.push_back("non-finite diagonal at node " + std::to_string(i + 1));
    } else if (a <= 0.0) {
      report.push_back("nonpositive diagonal at node " +
                       std::to_string(i + 1));
    }
    if (i < model.potentials().size() && !std::isfinite(model.potential(i)))
      report.push_back("non-finite potential at node " +
                       std::to_string(i + 1));
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : model.edges()) {
    if (e.i >= n || e.j >= n) {
      report.push_back("edge " + edge_name(e.i, e.j) +
                       " references a node outside 1.." + std::to_string(n));
      continue;
    }
    if (e.i == e.j) {
      report.push_back("self-loop at node " + std::to_string(e.i + 1));
      continue;
    }
    const auto key = std::minmax(e.i, e.j);
    if (!seen.insert(key).second)
      report.push_back("duplicate edge " + edge_name(key.first, key.second));
    if (!std::isfinite(e.coupling)) {
      report.push_back("non-finite coupling on edge " + edge_name(e.i, e.j));
    } else if (e.coupling == 0.0) {
      report.push_back("zero coupling on edge " + edge_name(e.i, e.j));
    }
  }
  return report;
}

void require_valid(const GaussianModel& model) {
  auto report = validate(model);
  if (!report.empty()) throw ValidationError(std::move(report));
}

NormalizedModel normalize(const GaussianModel& model) {
  const std::size_t n = model.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!(model.diag(i) > 0.0)) throw NonpositiveDiagonal(i, model.diag(i));
  require_valid(model);

  std::vector<double> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = std::sqrt(model.diag(i));

  std::vector<double> potentials(n);
  for (std::size_t i = 0; i < n; ++i)
    potentials[i] = model.potential(i) / root[i];
  std::vector<double> couplings;
  couplings.reserve(model.edge_count());
  for (const Edge& e : model.edges())
    couplings.push_back(e.coupling / std::sqrt(model.diag(e.i) * model.diag(e.j)));

  std::vector<double> scale(model.diag().begin(), model.diag().end());
  return {model.with_values(std::vector<double>(n, 1.0), std::move(potentials),
                            std::move(couplings)),
          std::move(scale)};
}

std::vector<double> NormalizedModel::denormalize_mean(
    std::span<const double> mean) const {
  std::vector<double> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i)
    out[i] = mean[i] / std::sqrt(scale[i]);
  return out;
}

std::vector<double> NormalizedModel::denormalize_variance(
    std::span<const double> variance) const {
  std::vector<double> out(variance.size());
  for (std::size_t i = 0; i < variance.size(); ++i)
    out[i] = variance[i] / scale[i];
  return out;
}

std::vector<double> NormalizedModel::normalize_mean(
    std::span<const double> mean) const {
  std::vector<double> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i)
    out[i] = mean[i] * std::sqrt(scale[i]);
  return out;
}

namespace {

using json = nlohmann::ordered_json;

const json& field(const json& obj, const std::string& where,
                  const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(where + ": missing field \"" + key + "\"");
  return *it;
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ParseError(where + ": unexpected field \"" + k + "\"");
  }
}

double number(const json& obj, const std::string& where, const char* key) {
  const json& v = field(obj, where, key);
  if (!v.is_number())
    throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::size_t node_id(const json& obj, const std::string& where,
                    const char* key) {
  const json& v = field(obj, where, key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ParseError(where + "." + key + ": expected a positive integer id");
  return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace

GaussianModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  expect_keys(doc, "model", {"nodes", "edges"});
  const json& nodes = field(doc, "model", "nodes");
  const json& edges = field(doc, "model", "edges");
  if (!nodes.is_array()) throw ParseError("nodes: expected an array");
  if (!edges.is_array()) throw ParseError("edges: expected an array");

  std::vector<double> diag;
  std::vector<double> potentials;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string where = "nodes[" + std::to_string(k) + "]";
    expect_keys(nodes[k], where, {"id", "a", "b"});
    const std::size_t id = node_id(nodes[k], where, "id");
    if (id != k + 1)
      throw ParseError(where + ".id: expected " + std::to_string(k + 1) +
                       " (ids must be contiguous and ascending), got " +
                       std::to_string(id));
    diag.push_back(number(nodes[k], where, "a"));
    potentials.push_back(number(nodes[k], where, "b"));
  }

  const std::size_t n = diag.size();
  std::vector<Edge> parsed;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "edges[" + std::to_string(k) + "]";
    expect_keys(edges[k], where, {"i", "j", "a"});
    const std::size_t i = node_id(edges[k], where, "i");
    const std::size_t j = node_id(edges[k], where, "j");
    const double a = number(edges[k], where, "a");
    if (i >= j)
      throw ParseError(where + ": require i < j, got i=" + std::to_string(i) +
                       " j=" + std::to_string(j));
    if (j > n)
      throw ParseError(where + ".j: node " + std::to_string(j) +
                       " does not exist (n=" + std::to_string(n) + ")");
    if (a == 0.0)
      throw ParseError(where + ": zero coupling on edge {" +
                       std::to_string(i) + "," + std::to_string(j) +
                       "}; omit the edge instead");
    if (!seen.insert({i, j}).second)
      throw ParseError(where + ": duplicate edge {" + std::to_string(i) + "," +
                       std::to_string(j) + "}");
    parsed.push_back({i - 1, j - 1, a});
  }

  GaussianModel model(std::move(diag), std::move(potentials),
                      std::move(parsed));
  require_valid(model);
  return model;
}

std::string format_model(const GaussianModel& model) {
  json nodes = json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    json node;
    node["id"] = i + 1;
    node["a"] = model.diag(i);
    node["b"] = model.potential(i);
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const Edge& e : model.edges()) {
    const auto [lo, hi] = std::minmax(e.i, e.j);
    json edge;
    edge["i"] = lo + 1;
    edge["j"] = hi + 1;
    edge["a"] = e.coupling;
    edges.push_back(std::move(edge));
  }
  json doc;
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

GaussianModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_model(const GaussianModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << format_model(model);
}

}  // namespace gbp
