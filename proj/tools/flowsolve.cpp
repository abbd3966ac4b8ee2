// flowsolve: experiment runner for the flow-ODE samplers.
//
//   flowsolve sweep    --config <json> [--out DIR] [--seed N] [--nfe LIST] [--timing]
//   flowsolve converge --config <json> [--out DIR] [--seed N] [--nfe LIST]
//   flowsolve plot     --csv <path> --out <svg> [--metric NAME]
//
// Exit codes: 0 success, 2 configuration error, 3 some cells failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flowsolve/experiment.hpp"
#include "flowsolve/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace flowsolve;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> nfe;
  bool timing = false;
};

ExperimentConfig load(const CommonOptions& opt) {
  ExperimentConfig cfg = load_experiment_config(opt.config);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.nfe.empty()) cfg.schedule.nfe = opt.nfe;
  if (opt.timing) cfg.record_timing = true;
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::vector<PlotSeries> series_by_solver(const std::vector<ResultRow>& rows,
                                         const std::string& metric) {
  std::vector<PlotSeries> series;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    if (r.metric != metric || !r.value) continue;
    std::string name = r.solver;
    if (!r.order.empty()) name += "(s=" + r.order + (r.corrector ? ",pc)" : ")");
    auto [it, inserted] = index.emplace(name, series.size());
    if (inserted) series.push_back({name, {}, {}});
    series[it->second].x.push_back(static_cast<double>(r.nfe));
    series[it->second].y.push_back(*r.value);
  }
  return series;
}

int run_sweep_cmd(const CommonOptions& opt) {
  const ExperimentConfig cfg = load(opt);
  const SweepResult result = run_sweep(cfg);
  fs::create_directories(cfg.output_dir);
  const fs::path csv = cfg.output_dir / "sweep.csv";
  std::ostringstream os;
  write_csv(os, result.rows);
  write_file(csv, os.str());
  std::cout << "wrote " << result.rows.size() << " rows to " << csv.string() << '\n';
  if (result.failed_cells > 0) {
    std::cerr << result.failed_cells << " cell(s) failed\n";
    return kExitPartial;
  }
  return 0;
}

int run_converge_cmd(const CommonOptions& opt) {
  const ExperimentConfig cfg = load(opt);
  const ConvergenceReport report = run_convergence(cfg);
  fs::create_directories(cfg.output_dir);
  std::ostringstream rows, summary;
  write_csv(rows, report.rows);
  const std::string sched = report.rows.empty() ? cfg.schedule.kind : report.rows.front().schedule;
  write_convergence_summary(summary, report.entries, sched);
  write_file(cfg.output_dir / "convergence.csv", rows.str());
  write_file(cfg.output_dir / "convergence_summary.csv", summary.str());

  std::vector<PlotSeries> series;
  for (const auto& e : report.entries) {
    PlotSeries s{e.solver.label(), {}, {}};
    for (std::size_t i = 0; i < e.fit.step_counts.size(); ++i) {
      if (e.fit.errors[i] > 0.0) {
        s.x.push_back(static_cast<double>(e.fit.step_counts[i]));
        s.y.push_back(e.fit.errors[i]);
      }
    }
    if (!s.x.empty()) series.push_back(std::move(s));
  }
  if (!series.empty()) {
    emit_svg_plot(series, {"steps N", "endpoint RMSE", true, true, "convergence"},
                  cfg.output_dir / "convergence.svg");
  }
  for (const auto& e : report.entries) {
    std::printf("%-16s slope %7.3f  r2 %.5f\n", e.solver.label().c_str(), e.fit.slope,
                e.fit.r_squared);
  }
  if (report.failed_cells > 0) {
    std::cerr << report.failed_cells << " cell(s) failed\n";
    return kExitPartial;
  }
  return 0;
}

int run_plot_cmd(const std::string& csv_path, const std::string& out_path, std::string metric) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError(csv_path + ": cannot open CSV");
  std::vector<ResultRow> rows;
  try {
    rows = read_csv(in);
  } catch (const InvalidArgument& e) {
    throw ConfigError(csv_path + ": " + e.what());
  }
  if (metric.empty() && !rows.empty()) metric = rows.front().metric;
  const auto series = series_by_solver(rows, metric);
  if (series.empty()) throw ConfigError(csv_path + ": no values for metric '" + metric + "'");
  emit_svg_plot(series, {"NFE", metric, false, true, metric}, out_path);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowsolve: cached multistep flow-ODE samplers and benchmark harness"};
  app.require_subcommand(1);

  CommonOptions sweep_opt, conv_opt;
  auto add_common = [](CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "experiment JSON")->required();
    sub->add_option("--out", o.out, "output directory (overrides config)");
    sub->add_option("--seed", o.seed, "RNG seed (overrides config)");
    sub->add_option("--nfe", o.nfe, "NFE / step list (overrides config)")->delimiter(',');
  };
  auto* sweep = app.add_subcommand("sweep", "solver x NFE sweep to CSV");
  add_common(sweep, sweep_opt);
  sweep->add_flag("--timing", sweep_opt.timing, "fill the elapsed_ms column");
  auto* conv = app.add_subcommand("converge", "empirical convergence order");
  add_common(conv, conv_opt);

  std::string csv_path, svg_path, metric;
  auto* plot = app.add_subcommand("plot", "render a sweep CSV as SVG");
  plot->add_option("--csv", csv_path, "sweep CSV")->required();
  plot->add_option("--out", svg_path, "SVG output path")->required();
  plot->add_option("--metric", metric, "metric to plot (default: first in file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sweep) return run_sweep_cmd(sweep_opt);
    if (*conv) return run_converge_cmd(conv_opt);
    if (*plot) return run_plot_cmd(csv_path, svg_path, metric);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
