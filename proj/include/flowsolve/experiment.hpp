#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowsolve/core.hpp"
#include "flowsolve/metrics.hpp"
#include "flowsolve/solvers.hpp"

namespace flowsolve {

/// Invalid experiment configuration.  what() is "<source>:<line>: <pointer>: <message>"
/// whenever the offending value can be located.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverSpec {
  Method method = Method::euler;
  int order = 1;
  bool corrector = false;

  /// Short label, e.g. "euler" or "flow(s=2,pc)".
  std::string label() const;
};

struct ScheduleSpec {
  std::string kind = "uniform";  // "uniform" | "shifted"
  double shift = 1.0;
  /// NFE budgets for sweeps; interval counts for convergence runs.
  std::vector<std::size_t> nfe;

  TimeSchedule make(std::size_t steps) const;
};

struct ExperimentConfig {
  std::shared_ptr<const VelocityField> field;
  std::string field_kind;
  std::vector<SolverSpec> solvers;
  ScheduleSpec schedule;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics{"endpoint_rmse"};
  std::filesystem::path output_dir = "flowsolve_out";
  std::size_t reference_steps = 1000;
  bool record_timing = false;
};

inline const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"endpoint_rmse", "endpoint_max", "gaussian_w2",
                                              "energy_distance"};
  return names;
}

/// Builds a config from a parsed JSON document.  `source` names the
/// document in error messages; `text`, when given, is used to attach line
/// numbers.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::string& source = "config",
                                         const std::string* text = nullptr);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Builds a velocity field from its JSON description
/// ({"kind": "affine" | "poly_time" | "gaussian_mixture" | "grid", ...}).
std::shared_ptr<const VelocityField> make_field(const nlohmann::json& spec,
                                                const std::filesystem::path& base_dir = {});

struct ResultRow {
  std::string solver;
  std::string order;      // empty for non-flow methods
  bool corrector = false;
  std::string schedule;
  std::size_t nfe = 0;    // measured evaluations per trajectory
  std::size_t trial_count = 0;
  std::string metric;
  std::optional<double> value;  // empty when the cell failed
  std::optional<double> elapsed_ms;
};

inline constexpr const char* kCsvHeader =
    "solver,order,corrector,schedule,nfe,trial_count,metric,value,elapsed_ms";

struct SweepResult {
  std::vector<ResultRow> rows;
  std::size_t failed_cells = 0;
};

/// Standard-normal initial noise for trial i of a seeded run.
State initial_noise(std::uint64_t seed, std::size_t trial, Eigen::Index dim);

/// Endpoint of the true flow from x at t = 1 to t = 0: exact when the field
/// has a closed-form solution, otherwise dense uniform RK-3.
State reference_endpoint(const VelocityField& field, const State& x, std::size_t dense_steps);

/// Independent draws from the data distribution at t = 0 when the field
/// defines one (Gaussian mixture); empty otherwise.
std::vector<State> target_samples(const VelocityField& field, std::uint64_t seed,
                                  std::size_t count);

/// Every (solver, NFE) cell in deterministic grid order.  Solver failures
/// mark the cell failed and the sweep continues.
SweepResult run_sweep(const ExperimentConfig& config, std::size_t threads = 0);

struct ConvergenceEntry {
  SolverSpec solver;
  ConvergenceResult fit;
  std::vector<std::size_t> nfe;
};

struct ConvergenceReport {
  std::vector<ResultRow> rows;
  std::vector<ConvergenceEntry> entries;
  std::size_t failed_cells = 0;
};

/// Endpoint RMSE against the exact solution for every solver and interval
/// count, plus a fitted order per solver.
ConvergenceReport run_convergence(const ExperimentConfig& config, std::size_t threads = 0);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_convergence_summary(std::ostream& os, const std::vector<ConvergenceEntry>& entries,
                               const std::string& schedule);
std::vector<ResultRow> read_csv(std::istream& is);

/// FLOWSOLVE_THREADS if set, else hardware concurrency.
std::size_t default_thread_count();

}  // namespace flowsolve
