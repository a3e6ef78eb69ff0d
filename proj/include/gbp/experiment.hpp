#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "gbp/bp.hpp"
#include "gbp/generator.hpp"

namespace gbp {

// Trajectory CSV: header "k,mse,log10_mse" (plus mu_1..mu_n when
// with_means), one row per record. mse cells are empty without an exact
// mean; log10(0) is written as "-inf".
std::string format_trajectory_csv(const Trajectory& trajectory,
                                  bool with_means = false);

// Line plot of log10 mean-square error against the iteration number.
std::string render_error_svg(const Trajectory& trajectory,
                             const std::string& title);

struct ExperimentOptions {
  GeneratorSpec spec;
  std::optional<std::string> preset_name;
  std::filesystem::path out_dir = ".";
  bool svg = false;
  StoppingRule stop;
};

struct ExperimentReport {
  GeneratorSpec spec;
  std::optional<std::string> preset_name;
  std::size_t attempts = 1;
  std::size_t edges = 0;
  double rho_bar = 0.0;
  double rho_tol = 0.0;
  bool walk_summable = false;
  std::optional<double> theorem1_c;
  std::size_t iterations = 0;
  StopReason stop = StopReason::MaxIterations;
  std::optional<double> final_log10_mse;
  std::optional<RateFit> fit;
  // Set when BP reached the exact mean too quickly to fit a rate (trees).
  bool exact_convergence = false;
  bool bound_satisfied = false;
  std::string model_file;
  std::string trajectory_file;
  std::optional<std::string> svg_file;

  double empirical_rate() const {
    return fit ? fit->empirical_rate : 0.0;
  }
};

/// generate -> analyze -> exact solve -> BP run -> rate fit -> bound check.
/// Writes model.json, trajectory.csv, report.json and (optionally)
/// log_error.svg into out_dir. Artifact names in the report are relative to
/// out_dir.
ExperimentReport run_experiment(const ExperimentOptions& options);

std::string format_report(const ExperimentReport& report);

}  // namespace gbp
