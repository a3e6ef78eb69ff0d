#include "gbp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "gbp/exact.hpp"
#include "gbp/walksum.hpp"

namespace gbp {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Step from {1, 2, 5} x 10^m giving at most max_ticks intervals over span.
double nice_step(double span, int max_ticks) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / max_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string format_trajectory_csv(const Trajectory& trajectory,
                                  bool with_means) {
  std::string out = "k,mse,log10_mse";
  const std::size_t n =
      trajectory.records.empty() ? 0 : trajectory.records.front().mean.size();
  if (with_means)
    for (std::size_t i = 0; i < n; ++i) out += ",mu_" + std::to_string(i + 1);
  out += '\n';
  for (const auto& rec : trajectory.records) {
    out += std::to_string(rec.k);
    out += ',';
    if (rec.mse) out += num(*rec.mse);
    out += ',';
    if (rec.log10_mse) out += num(*rec.log10_mse);
    if (with_means)
      for (double m : rec.mean) out += "," + num(m);
    out += '\n';
  }
  return out;
}

std::string render_error_svg(const Trajectory& trajectory,
                             const std::string& title) {
  constexpr double width = 640, height = 420;
  constexpr double left = 80, right = 20, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::vector<std::pair<double, double>> pts;
  for (const auto& rec : trajectory.records)
    if (rec.log10_mse && std::isfinite(*rec.log10_mse))
      pts.emplace_back(static_cast<double>(rec.k), *rec.log10_mse);

  double x_max = std::max<double>(1.0, static_cast<double>(trajectory.iterations()));
  double y_min = -1.0, y_max = 0.0;
  if (!pts.empty()) {
    y_min = y_max = pts.front().second;
    for (const auto& p : pts) {
      y_min = std::min(y_min, p.second);
      y_max = std::max(y_max, p.second);
    }
    y_min = std::floor(y_min);
    y_max = std::ceil(y_max);
    if (y_max <= y_min) y_max = y_min + 1.0;
  }
  auto sx = [&](double x) { return left + plot_w * x / x_max; };
  auto sy = [&](double y) {
    return top + plot_h * (y_max - y) / (y_max - y_min);
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) +
       "\" height=\"" + fixed(height, 0) + "\" viewBox=\"0 0 " +
       fixed(width, 0) + " " + fixed(height, 0) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top + plot_h) +
       "\" x2=\"" + fixed(left + plot_w) + "\" y2=\"" + fixed(top + plot_h) +
       "\"/>\n";
  s += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top) + "\" x2=\"" +
       fixed(left) + "\" y2=\"" + fixed(top + plot_h) + "\"/>\n";
  s += "</g>\n";

  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const double xs = nice_step(x_max, 10);
  for (double x = 0.0; x <= x_max + 1e-9; x += xs) {
    s += "<line x1=\"" + fixed(sx(x)) + "\" y1=\"" + fixed(top + plot_h) +
         "\" x2=\"" + fixed(sx(x)) + "\" y2=\"" + fixed(top + plot_h + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(sx(x)) + "\" y=\"" + fixed(top + plot_h + 18) +
         "\" text-anchor=\"middle\">" + tick_label(x) + "</text>\n";
  }
  const double ys = nice_step(y_max - y_min, 8);
  for (double y = std::ceil(y_min / ys) * ys; y <= y_max + 1e-9; y += ys) {
    s += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(sy(y)) +
         "\" x2=\"" + fixed(left) + "\" y2=\"" + fixed(sy(y)) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(sy(y) + 4) +
         "\" text-anchor=\"end\">" + tick_label(y) + "</text>\n";
  }
  s += "</g>\n";

  s += "<text x=\"" + fixed(left + plot_w / 2) + "\" y=\"" +
       fixed(height - 14) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\">Iteration k</text>\n";
  s += "<text x=\"18\" y=\"" + fixed(top + plot_h / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       "transform=\"rotate(-90 18 " + fixed(top + plot_h / 2) +
       ")\">log10(sum_i (mu_i(k) - mu_i)^2 / n)</text>\n";

  if (!pts.empty()) {
    s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
         "points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) s += ' ';
      s += fixed(sx(pts[i].first)) + "," + fixed(sy(pts[i].second));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

ExperimentReport run_experiment(const ExperimentOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);

  ExperimentReport report;
  report.spec = options.spec;
  report.preset_name = options.preset_name;

  Generated gen = generate(options.spec);
  const GaussianModel& model = gen.model;
  report.attempts = gen.attempts;
  report.edges = model.edge_count();
  report.model_file = "model.json";
  save_model(model, options.out_dir / report.model_file);

  const NormalizedModel normalized = normalize(model);
  const WalkSummabilityReport ws = analyze(normalized);
  report.rho_bar = ws.rho_bar;
  report.rho_tol = ws.rho_tol;
  report.walk_summable = ws.walk_summable;
  report.theorem1_c = ws.theorem1_c;

  const ExactSolution exact = solve(model);
  report.trajectory_file = "trajectory.csv";
  Trajectory traj;
  try {
    traj = run(model, std::span<const double>(exact.mean), options.stop);
  } catch (NonpositivePrecision& e) {
    if (e.partial())
      write_text(options.out_dir / report.trajectory_file,
                 format_trajectory_csv(*e.partial()));
    throw;
  }
  write_text(options.out_dir / report.trajectory_file,
             format_trajectory_csv(traj));

  report.iterations = traj.iterations();
  report.stop = traj.stop;
  report.final_log10_mse = traj.records.back().log10_mse;
  try {
    report.fit = fit_rate(traj);
  } catch (const InsufficientData&) {
    report.exact_convergence = traj.stop == StopReason::Converged;
  }
  if (ws.walk_summable)
    report.bound_satisfied = theorem1_check(normalized, traj, ws).all();

  if (options.svg) {
    report.svg_file = "log_error.svg";
    const std::string title =
        "Gaussian BP, " + std::to_string(model.size()) + " nodes";
    write_text(options.out_dir / *report.svg_file,
               render_error_svg(traj, title));
  }
  write_text(options.out_dir / "report.json", format_report(report));
  return report;
}

std::string format_report(const ExperimentReport& r) {
  using json = nlohmann::ordered_json;
  auto optional_number = [](const std::optional<double>& v) -> json {
    if (!v) return nullptr;
    if (std::isinf(*v)) return *v < 0 ? "-inf" : "inf";
    return *v;
  };

  json gen;
  gen["preset"] = r.preset_name ? json(*r.preset_name) : json(nullptr);
  gen["nodes"] = r.spec.nodes;
  gen["max_degree"] = r.spec.max_degree;
  gen["coupling"] = r.spec.coupling;
  gen["seed"] = r.spec.seed;
  gen["require_walk_summable"] = r.spec.require_walk_summable;
  gen["attempts"] = r.attempts;
  gen["edges"] = r.edges;

  json doc;
  doc["generator"] = std::move(gen);
  doc["rho_bar"] = r.rho_bar;
  doc["rho_tol"] = r.rho_tol;
  doc["walk_summable"] = r.walk_summable;
  doc["theorem1_C"] = optional_number(r.theorem1_c);
  doc["iterations"] = r.iterations;
  doc["stop"] = r.stop == StopReason::Converged ? "converged" : "max_iterations";
  doc["final_log10_mse"] = optional_number(r.final_log10_mse);
  if (r.fit) {
    json fit;
    fit["slope"] = r.fit->slope;
    fit["intercept"] = r.fit->intercept;
    fit["r_squared"] = r.fit->r_squared;
    fit["points"] = r.fit->points;
    doc["fit"] = std::move(fit);
  } else {
    doc["fit"] = nullptr;
  }
  doc["empirical_rate"] = r.empirical_rate();
  doc["exact_convergence"] = r.exact_convergence;
  doc["bound_satisfied"] = r.bound_satisfied;
  json artifacts;
  artifacts["model"] = r.model_file;
  artifacts["trajectory"] = r.trajectory_file;
  artifacts["svg"] = r.svg_file ? json(*r.svg_file) : json(nullptr);
  doc["artifacts"] = std::move(artifacts);
  return doc.dump(2) + "\n";
}

}  // namespace gbp
