// gbp: command-line front end for Gaussian belief propagation experiments.
//
//   gbp check <model.json>
//   gbp oracle <model.json>
//   gbp run <model.json> [--max-iters N] [--tol T] [--no-exact] [--out F] [--means]
//   gbp tree <model.json> --root R --depth T [--emit F]
//   gbp experiment (--preset NAME | --nodes N --max-degree D --coupling C)
//                  --seed S [--out-dir DIR] [--svg]
//
// Exit codes: 0 ok, 1 usage/parse/other error, 2 not walk-summable (check),
// 3 BP precision failure, 4 information matrix not positive definite.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "gbp/bp.hpp"
#include "gbp/ctree.hpp"
#include "gbp/error.hpp"
#include "gbp/exact.hpp"
#include "gbp/experiment.hpp"
#include "gbp/model.hpp"
#include "gbp/walksum.hpp"

namespace {

using json = nlohmann::ordered_json;

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kNotWalkSummable = 2,
  kPrecisionFailure = 3,
  kIndefinite = 4,
};

void setup_logging() {
  auto logger = spdlog::stderr_logger_mt("gbp");
  logger->set_pattern("gbp: %l: %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("GBP_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

json number_or_string(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  return v;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gbp::Error("cannot write " + path);
  out << text;
}

int cmd_check(const std::string& path) {
  const gbp::GaussianModel model = gbp::load_model(path);
  const gbp::NormalizedModel normalized = gbp::normalize(model);
  const gbp::WalkSummabilityReport r = gbp::analyze(normalized);
  spdlog::info("rho(|R|) = {} +/- {}", r.rho_bar, r.rho_tol);

  json doc;
  doc["nodes"] = model.size();
  doc["edges"] = model.edge_count();
  doc["rho_bar"] = r.rho_bar;
  doc["rho_tol"] = r.rho_tol;
  doc["walk_summable"] = r.walk_summable;
  doc["scaling"] = r.scaling ? json(*r.scaling) : json(nullptr);
  doc["theorem1_C"] = r.theorem1_c ? json(*r.theorem1_c) : json(nullptr);
  std::cout << doc.dump(2) << '\n';
  return r.walk_summable ? kOk : kNotWalkSummable;
}

int cmd_oracle(const std::string& path) {
  const gbp::GaussianModel model = gbp::load_model(path);
  const gbp::ExactSolution sol = gbp::solve(model);
  json doc;
  doc["mu"] = sol.mean;
  doc["p"] = sol.marginal_variances;
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

struct RunFlags {
  std::size_t max_iters = 500;
  double tol = 1e-12;
  bool no_exact = false;
  std::string out;
  bool means = false;
};

int cmd_run(const std::string& path, const RunFlags& flags) {
  const gbp::GaussianModel model = gbp::load_model(path);
  std::optional<gbp::ExactSolution> exact;
  if (!flags.no_exact) exact = gbp::solve(model);

  auto emit_csv = [&](const gbp::Trajectory& traj) {
    const std::string csv = gbp::format_trajectory_csv(traj, flags.means);
    if (flags.out.empty()) {
      std::cout << csv;
    } else {
      write_file(flags.out, csv);
    }
  };

  gbp::Trajectory traj;
  try {
    std::optional<std::span<const double>> mean;
    if (exact) mean = std::span<const double>(exact->mean);
    traj = gbp::run(model, mean, {flags.max_iters, flags.tol});
  } catch (const gbp::NonpositivePrecision& e) {
    if (e.partial()) emit_csv(*e.partial());
    spdlog::error("{}", e.what());
    return kPrecisionFailure;
  }
  emit_csv(traj);

  json summary;
  summary["iterations"] = traj.iterations();
  summary["stop"] =
      traj.stop == gbp::StopReason::Converged ? "converged" : "max_iterations";
  const auto& last = traj.records.back();
  summary["final_mse"] = last.mse ? json(*last.mse) : json(nullptr);
  summary["final_log10_mse"] =
      last.log10_mse ? number_or_string(*last.log10_mse) : json(nullptr);
  if (exact) {
    try {
      const gbp::RateFit fit = gbp::fit_rate(traj);
      summary["slope"] = fit.slope;
      summary["r_squared"] = fit.r_squared;
      summary["empirical_rate"] = fit.empirical_rate;
    } catch (const gbp::InsufficientData& e) {
      spdlog::info("{}", e.what());
      summary["empirical_rate"] = nullptr;
    }
  }
  // Keep stdout clean for the CSV when it is not redirected to a file.
  (flags.out.empty() ? std::cerr : std::cout) << summary.dump(2) << '\n';
  return kOk;
}

int cmd_tree(const std::string& path, std::size_t root, std::size_t depth,
             const std::string& emit) {
  const gbp::GaussianModel model = gbp::load_model(path);
  if (root < 1 || root > model.size())
    throw gbp::Error("--root must be in 1.." + std::to_string(model.size()));
  const gbp::ComputationTree tree = gbp::build(model, root - 1, depth);
  if (!emit.empty()) write_file(emit, gbp::format_tree(tree));
  const gbp::Equivalence eq =
      gbp::verify_bp_equivalence(model, root - 1, depth);

  json doc;
  doc["root"] = root;
  doc["depth"] = depth;
  doc["tree_nodes"] = tree.size();
  doc["layer_sizes"] = tree.layer_sizes();
  doc["bp_mean"] = eq.bp_mean;
  doc["tree_mean"] = eq.tree_mean;
  doc["difference"] = eq.difference;
  doc["equivalent"] = eq.difference <= gbp::kEquivalenceTolerance;
  std::cout << doc.dump(2) << '\n';
  return eq.difference <= gbp::kEquivalenceTolerance ? kOk : kUsage;
}

struct ExperimentFlags {
  std::string preset;
  std::size_t nodes = 0;
  std::size_t max_degree = 0;
  double coupling = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool svg = false;
  bool allow_non_walk_summable = false;
  std::size_t max_iters = 500;
  double tol = 1e-12;
};

int cmd_experiment(const ExperimentFlags& flags) {
  gbp::ExperimentOptions options;
  if (!flags.preset.empty()) {
    auto spec = gbp::preset(flags.preset);
    if (!spec) throw gbp::Error("unknown preset '" + flags.preset + "'");
    options.spec = *spec;
    options.preset_name = flags.preset;
  } else {
    options.spec = {flags.nodes, flags.max_degree, flags.coupling, 0,
                    !flags.allow_non_walk_summable};
  }
  options.spec.seed = flags.seed;
  options.out_dir = flags.out_dir;
  options.svg = flags.svg;
  options.stop = {flags.max_iters, flags.tol};

  const gbp::ExperimentReport report = gbp::run_experiment(options);
  spdlog::info("rho(|R|) = {}, empirical rate = {}", report.rho_bar,
               report.empirical_rate());
  std::cout << gbp::format_report(report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Gaussian belief propagation on sparse Markov networks"};
  app.require_subcommand(1);

  std::string model_path;

  auto* check = app.add_subcommand("check", "Walk-summability analysis");
  check->add_option("model", model_path, "Model file")->required();

  auto* oracle = app.add_subcommand("oracle", "Exact means and variances");
  oracle->add_option("model", model_path, "Model file")->required();

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run BP and write the error trajectory");
  run->add_option("model", model_path, "Model file")->required();
  run->add_option("--max-iters", run_flags.max_iters, "Iteration cap")
      ->capture_default_str();
  run->add_option("--tol", run_flags.tol, "Successive-mean change tolerance")
      ->capture_default_str();
  run->add_flag("--no-exact", run_flags.no_exact, "Skip the exact oracle");
  run->add_option("--out", run_flags.out, "Trajectory CSV path");
  run->add_flag("--means", run_flags.means, "Add per-node mean columns");

  std::size_t root = 0;
  std::size_t depth = 0;
  std::string emit;
  auto* tree = app.add_subcommand("tree", "Computation-tree equivalence check");
  tree->add_option("model", model_path, "Model file")->required();
  tree->add_option("--root", root, "Root node (1-based)")->required();
  tree->add_option("--depth", depth, "Tree depth")->required();
  tree->add_option("--emit", emit, "Write the tree listing to this file");

  ExperimentFlags exp_flags;
  auto* exp = app.add_subcommand("experiment", "Random-model convergence experiment");
  auto* preset_opt = exp->add_option("--preset", exp_flags.preset,
                                     "paper13 or paper1000")
                         ->check(CLI::IsMember({"paper13", "paper1000"}));
  auto* nodes_opt = exp->add_option("--nodes", exp_flags.nodes, "Node count");
  auto* degree_opt =
      exp->add_option("--max-degree", exp_flags.max_degree, "Degree cap");
  auto* coupling_opt = exp->add_option("--coupling", exp_flags.coupling,
                                       "Couplings drawn from (-C, C)");
  nodes_opt->excludes(preset_opt);
  degree_opt->excludes(preset_opt);
  coupling_opt->excludes(preset_opt);
  exp->add_option("--seed", exp_flags.seed, "PRNG seed")->required();
  exp->add_option("--out-dir", exp_flags.out_dir, "Artifact directory")
      ->capture_default_str();
  exp->add_flag("--svg", exp_flags.svg, "Also write log_error.svg");
  exp->add_flag("--allow-non-walk-summable", exp_flags.allow_non_walk_summable,
                "Keep the first draw even if rho(|R|) >= 1");
  exp->add_option("--max-iters", exp_flags.max_iters, "Iteration cap")
      ->capture_default_str();
  exp->add_option("--tol", exp_flags.tol, "Successive-mean change tolerance")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(model_path);
    if (*oracle) return cmd_oracle(model_path);
    if (*run) return cmd_run(model_path, run_flags);
    if (*tree) return cmd_tree(model_path, root, depth, emit);
    if (*exp) {
      if (exp_flags.preset.empty() &&
          (!*nodes_opt || !*degree_opt || !*coupling_opt)) {
        std::cerr << "experiment: give --preset or all of --nodes, "
                     "--max-degree, --coupling\n";
        return kUsage;
      }
      return cmd_experiment(exp_flags);
    }
  } catch (const gbp::NotPositiveDefinite& e) {
    spdlog::error("{}", e.what());
    return kIndefinite;
  } catch (const gbp::NonpositivePrecision& e) {
    spdlog::error("{}", e.what());
    return kPrecisionFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  return kUsage;
}
