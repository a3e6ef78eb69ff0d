// Python bindings. Node ids are 0-based, as in the C++ API.

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gbp/bp.hpp"
#include "gbp/ctree.hpp"
#include "gbp/error.hpp"
#include "gbp/exact.hpp"
#include "gbp/experiment.hpp"
#include "gbp/generator.hpp"
#include "gbp/model.hpp"
#include "gbp/walksum.hpp"

namespace py = pybind11;
using namespace gbp;

namespace {

template <class T>
std::vector<T> to_vector(std::span<const T> s) {
  return {s.begin(), s.end()};
}

GaussianModel make_model(std::vector<double> diag, std::vector<double> potentials,
                         const std::vector<std::tuple<NodeId, NodeId, double>>& edges) {
  std::vector<Edge> list;
  list.reserve(edges.size());
  for (const auto& [i, j, c] : edges) list.push_back({i, j, c});
  return GaussianModel(std::move(diag), std::move(potentials), std::move(list));
}

std::vector<std::tuple<NodeId, NodeId, double>> edge_tuples(const GaussianModel& m) {
  std::vector<std::tuple<NodeId, NodeId, double>> out;
  for (const Edge& e : m.edges()) out.emplace_back(e.i, e.j, e.coupling);
  return out;
}

const char* stop_name(StopReason r) {
  return r == StopReason::Converged ? "converged" : "max_iterations";
}

}  // namespace

PYBIND11_MODULE(_gbp, m) {
  m.doc() = "Gaussian belief propagation, walk-sum analysis and computation trees";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<ValidationError>(m, "ValidationError", error);
  py::register_exception<NonpositiveDiagonal>(m, "NonpositiveDiagonal", error);
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", error);
  py::register_exception<NotATree>(m, "NotATree", error);
  py::register_exception<DidNotConverge>(m, "DidNotConverge", error);
  py::register_exception<LimitExceeded>(m, "LimitExceeded", error);
  py::register_exception<NotWalkSummable>(m, "NotWalkSummable", error);
  py::register_exception<InsufficientData>(m, "InsufficientData", error);
  py::register_exception<SizeLimit>(m, "SizeLimit", error);
  py::register_exception<Unsatisfiable>(m, "Unsatisfiable", error);
  py::register_exception<NonpositivePrecision>(m, "NonpositivePrecision", error);

  py::class_<GaussianModel>(m, "GaussianModel")
      .def(py::init(&make_model), py::arg("diag"), py::arg("potentials"),
           py::arg("edges") = std::vector<std::tuple<NodeId, NodeId, double>>{})
      .def_property_readonly("size", &GaussianModel::size)
      .def_property_readonly("edge_count", &GaussianModel::edge_count)
      .def_property_readonly("diag", [](const GaussianModel& g) { return to_vector(g.diag()); })
      .def_property_readonly("potentials",
                             [](const GaussianModel& g) { return to_vector(g.potentials()); })
      .def_property_readonly("edges", &edge_tuples)
      .def("degree", &GaussianModel::degree)
      .def("neighbors",
           [](const GaussianModel& g, NodeId i) {
             std::vector<NodeId> out;
             for (const Neighbor& nb : g.neighbors(i)) out.push_back(nb.node);
             return out;
           })
      .def("coupling", &GaussianModel::coupling)
      .def("to_json", [](const GaussianModel& g) { return format_model(g); })
      .def(py::self == py::self)
      .def("__len__", &GaussianModel::size)
      .def("__repr__", [](const GaussianModel& g) {
        return "<GaussianModel nodes=" + std::to_string(g.size()) +
               " edges=" + std::to_string(g.edge_count()) + ">";
      });

  py::class_<NormalizedModel>(m, "NormalizedModel")
      .def_readonly("base", &NormalizedModel::base)
      .def_readonly("scale", &NormalizedModel::scale)
      .def("denormalize_mean",
           [](const NormalizedModel& n, std::vector<double> v) { return n.denormalize_mean(v); })
      .def("denormalize_variance", [](const NormalizedModel& n, std::vector<double> v) {
        return n.denormalize_variance(v);
      })
      .def("normalize_mean",
           [](const NormalizedModel& n, std::vector<double> v) { return n.normalize_mean(v); });

  m.def("validate", &validate);
  m.def("normalize", &normalize);
  m.def("parse_model", [](const std::string& s) { return parse_model(s); });
  m.def("format_model", &format_model);
  m.def("load_model", &load_model);
  m.def("save_model", &save_model);

  py::class_<ExactSolution>(m, "ExactSolution")
      .def_readonly("mean", &ExactSolution::mean)
      .def_readonly("marginal_variances", &ExactSolution::marginal_variances)
      .def_readonly("full_covariance", &ExactSolution::full_covariance);
  m.def("solve", &solve, py::arg("model"), py::arg("full_covariance") = false,
        py::arg("dense_limit") = kDenseLimit);
  m.def("solve_tree", &solve_tree, py::arg("model"), py::arg("full_covariance") = false,
        py::arg("dense_limit") = kDenseLimit);
  m.def("dense_information", &dense_information);

  py::class_<SpectralEstimate>(m, "SpectralEstimate")
      .def_readonly("estimate", &SpectralEstimate::estimate)
      .def_readonly("achieved_tol", &SpectralEstimate::achieved_tol)
      .def_readonly("lower", &SpectralEstimate::lower)
      .def_readonly("upper", &SpectralEstimate::upper)
      .def_readonly("iterations", &SpectralEstimate::iterations);
  m.def(
      "spectral_radius",
      [](const Eigen::MatrixXd& dense, double tol, std::size_t max_it) {
        return spectral_radius(dense.sparseView(), tol, max_it);
      },
      py::arg("matrix"), py::arg("tol") = kSpectralTolerance,
      py::arg("max_iterations") = kSpectralMaxIterations);
  m.def("edge_weights", [](const NormalizedModel& n) {
    const EdgeWeightMatrix w = edge_weights(n);
    return py::make_tuple(Eigen::MatrixXd(w.r), Eigen::MatrixXd(w.abs_r));
  });

  py::class_<WalkSummabilityReport>(m, "WalkSummabilityReport")
      .def_readonly("rho_bar", &WalkSummabilityReport::rho_bar)
      .def_readonly("rho_tol", &WalkSummabilityReport::rho_tol)
      .def_readonly("walk_summable", &WalkSummabilityReport::walk_summable)
      .def_readonly("scaling", &WalkSummabilityReport::scaling)
      .def_readonly("theorem1_c", &WalkSummabilityReport::theorem1_c)
      .def_property_readonly("rho_upper", &WalkSummabilityReport::rho_upper);
  m.def("analyze", py::overload_cast<const NormalizedModel&>(&analyze));

  py::class_<Walk>(m, "Walk")
      .def_readonly("nodes", &Walk::nodes)
      .def_readonly("weight", &Walk::weight)
      .def_property_readonly("length", &Walk::length);
  m.def("enumerate_walks", &enumerate_walks, py::arg("model"), py::arg("source"),
        py::arg("target"), py::arg("length"));

  py::class_<SeriesPartialSums>(m, "SeriesPartialSums")
      .def_readonly("mean", &SeriesPartialSums::mean)
      .def_readonly("variance", &SeriesPartialSums::variance)
      .def_readonly("tail_bound", &SeriesPartialSums::tail_bound)
      .def_readonly("rho_bar", &SeriesPartialSums::rho_bar);
  m.def("series_mean_variance",
        [](const NormalizedModel& n, std::vector<double> b, std::size_t horizon) {
          return series_mean_variance(n, b, horizon);
        });

  py::class_<Marginals>(m, "Marginals")
      .def_readonly("iteration", &Marginals::iteration)
      .def_readonly("mean", &Marginals::mean)
      .def_readonly("variance", &Marginals::variance);
  m.def("marginals_at", &marginals_at);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("k", &TrajectoryRecord::k)
      .def_readonly("mean", &TrajectoryRecord::mean)
      .def_readonly("variance", &TrajectoryRecord::variance)
      .def_readonly("mse", &TrajectoryRecord::mse)
      .def_readonly("log10_mse", &TrajectoryRecord::log10_mse);
  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("records", &Trajectory::records)
      .def_readonly("exact_mean", &Trajectory::exact_mean)
      .def_property_readonly("stop", [](const Trajectory& t) { return stop_name(t.stop); })
      .def_property_readonly("iterations", &Trajectory::iterations)
      .def("to_csv", &format_trajectory_csv, py::arg("with_means") = false)
      .def("to_svg", &render_error_svg, py::arg("title") = "");
  m.def(
      "run",
      [](const GaussianModel& g, std::optional<std::vector<double>> exact,
         std::size_t max_iterations, double tol) {
        StoppingRule stop{max_iterations, tol};
        if (exact) return run(g, std::span<const double>(*exact), stop);
        return run(g, std::nullopt, stop);
      },
      py::arg("model"), py::arg("exact_mean") = std::nullopt,
      py::arg("max_iterations") = StoppingRule{}.max_iterations,
      py::arg("tol") = StoppingRule{}.tol);

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("r_squared", &RateFit::r_squared)
      .def_readonly("empirical_rate", &RateFit::empirical_rate)
      .def_readonly("points", &RateFit::points);
  m.def("fit_rate", &fit_rate, py::arg("trajectory"), py::arg("tail_fraction") = 0.5);

  py::class_<BoundCheck>(m, "BoundCheck")
      .def_property_readonly("holds",
                             [](const BoundCheck& b) {
                               return std::vector<bool>(b.holds.begin(), b.holds.end());
                             })
      .def_readonly("max_error", &BoundCheck::max_error)
      .def_readonly("bound", &BoundCheck::bound)
      .def("all", &BoundCheck::all);
  m.def("theorem1_check", &theorem1_check);

  py::class_<TreeNode>(m, "TreeNode")
      .def_property_readonly("parent",
                             [](const TreeNode& t) -> std::optional<std::size_t> {
                               if (t.parent == TreeNode::npos) return std::nullopt;
                               return t.parent;
                             })
      .def_readonly("copy_of", &TreeNode::copy_of)
      .def_readonly("layer", &TreeNode::layer);
  py::class_<ComputationTree>(m, "ComputationTree")
      .def_readonly("root", &ComputationTree::root)
      .def_readonly("depth", &ComputationTree::depth)
      .def_readonly("nodes", &ComputationTree::nodes)
      .def_readonly("tree_model", &ComputationTree::tree_model)
      .def_property_readonly("size", &ComputationTree::size)
      .def("layer_sizes", &ComputationTree::layer_sizes)
      .def("format", &format_tree);
  m.def("tree_size", &tree_size, py::arg("model"), py::arg("root"), py::arg("depth"),
        py::arg("limit") = kTreeSizeLimit);
  m.def("build_tree", &build, py::arg("model"), py::arg("root"), py::arg("depth"),
        py::arg("limit") = kTreeSizeLimit);

  py::class_<Equivalence>(m, "Equivalence")
      .def_readonly("bp_mean", &Equivalence::bp_mean)
      .def_readonly("tree_mean", &Equivalence::tree_mean)
      .def_readonly("difference", &Equivalence::difference)
      .def_readonly("tree_nodes", &Equivalence::tree_nodes);
  m.def("verify_bp_equivalence", &verify_bp_equivalence, py::arg("model"), py::arg("root"),
        py::arg("k"), py::arg("limit") = kTreeSizeLimit);

  py::class_<WalkCorrespondence>(m, "WalkCorrespondence")
      .def_readonly("verdict", &WalkCorrespondence::verdict)
      .def_readonly("graph_walks", &WalkCorrespondence::graph_walks)
      .def_readonly("tree_walks", &WalkCorrespondence::tree_walks);
  m.def("verify_walk_correspondence", &verify_walk_correspondence);

  py::class_<GeneratorSpec>(m, "GeneratorSpec")
      .def(py::init([](std::size_t nodes, std::size_t max_degree, double coupling,
                       std::uint64_t seed, bool require_walk_summable) {
             return GeneratorSpec{nodes, max_degree, coupling, seed, require_walk_summable};
           }),
           py::arg("nodes") = 13, py::arg("max_degree") = 5, py::arg("coupling") = 0.26,
           py::arg("seed") = 0, py::arg("require_walk_summable") = true)
      .def_readwrite("nodes", &GeneratorSpec::nodes)
      .def_readwrite("max_degree", &GeneratorSpec::max_degree)
      .def_readwrite("coupling", &GeneratorSpec::coupling)
      .def_readwrite("seed", &GeneratorSpec::seed)
      .def_readwrite("require_walk_summable", &GeneratorSpec::require_walk_summable);
  m.def("preset", [](const std::string& name) { return preset(name); });
  m.def("generate", [](const GeneratorSpec& spec) { return generate(spec).model; });

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("rho_bar", &ExperimentReport::rho_bar)
      .def_readonly("walk_summable", &ExperimentReport::walk_summable)
      .def_readonly("theorem1_c", &ExperimentReport::theorem1_c)
      .def_readonly("iterations", &ExperimentReport::iterations)
      .def_readonly("fit", &ExperimentReport::fit)
      .def_readonly("exact_convergence", &ExperimentReport::exact_convergence)
      .def_readonly("bound_satisfied", &ExperimentReport::bound_satisfied)
      .def_property_readonly("empirical_rate", &ExperimentReport::empirical_rate)
      .def("to_json", &format_report);
  m.def(
      "run_experiment",
      [](const GeneratorSpec& spec, const std::filesystem::path& out_dir, bool svg,
         std::optional<std::string> preset_name, std::size_t max_iterations, double tol) {
        ExperimentOptions opt;
        opt.spec = spec;
        opt.preset_name = std::move(preset_name);
        opt.out_dir = out_dir;
        opt.svg = svg;
        opt.stop = StoppingRule{max_iterations, tol};
        return run_experiment(opt);
      },
      py::arg("spec"), py::arg("out_dir"), py::arg("svg") = false,
      py::arg("preset_name") = std::nullopt,
      py::arg("max_iterations") = StoppingRule{}.max_iterations,
      py::arg("tol") = StoppingRule{}.tol);
}
