#include "flowsolve/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <thread>

#include "flowsolve/fields.hpp"
#include "flowsolve/random.hpp"

namespace flowsolve {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Line lookup for config diagnostics.  nlohmann::json keeps no source
// positions, so a second SAX pass over the text records the byte offset of
// every value, keyed by JSON pointer.

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

class PositionTracker : public nlohmann::json_sax<json> {
 public:
  explicit PositionTracker(const std::size_t* pos) : pos_(pos) {}

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override {
    value();
    stack_.push_back({true, "", 0});
    return true;
  }
  bool key(string_t& k) override {
    stack_.back().key = k;
    offsets[pointer()] = *pos_;
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    value();
    stack_.push_back({false, "", 0});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

  std::map<std::string, std::size_t> offsets;

 private:
  struct Level {
    bool object;
    std::string key;
    std::size_t index;
  };

  std::string pointer() const {
    std::string p;
    for (const auto& l : stack_) {
      p += '/';
      p += l.object ? escape_token(l.key) : std::to_string(l.index - 1);
    }
    return p;
  }

  bool value() {
    if (!stack_.empty() && !stack_.back().object) {
      ++stack_.back().index;
      offsets.emplace(pointer(), *pos_);
    }
    return true;
  }

  const std::size_t* pos_;
  std::vector<Level> stack_;
};

// Forward iterator that reports how far the parser has read.
struct CountingIterator {
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p;
  const char* begin;
  std::size_t* pos;

  reference operator*() const { return *p; }
  CountingIterator& operator++() {
    ++p;
    *pos = static_cast<std::size_t>(p - begin);
    return *this;
  }
  CountingIterator operator++(int) {
    auto tmp = *this;
    ++*this;
    return tmp;
  }
  bool operator==(const CountingIterator& o) const { return p == o.p; }
  bool operator!=(const CountingIterator& o) const { return p != o.p; }
};

std::size_t line_of(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class ConfigContext {
 public:
  ConfigContext(std::string source, const std::string* text) : source_(std::move(source)), text_(text) {
    if (text_) {
      std::size_t pos = 0;
      PositionTracker tracker(&pos);
      CountingIterator first{text_->data(), text_->data(), &pos};
      CountingIterator last{text_->data() + text_->size(), text_->data(), &pos};
      json::sax_parse(first, last, &tracker);
      offsets_ = std::move(tracker.offsets);
    }
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    std::string where = source_;
    if (text_) {
      // walk up to the nearest located ancestor
      std::string p = pointer;
      while (true) {
        auto it = offsets_.find(p);
        if (it != offsets_.end()) {
          where += ":" + std::to_string(line_of(*text_, it->second));
          break;
        }
        const auto slash = p.rfind('/');
        if (slash == std::string::npos || p.empty()) break;
        p = p.substr(0, slash);
      }
    }
    throw ConfigError(where + ": " + (pointer.empty() ? "/" : pointer) + ": " + message);
  }

 private:
  std::string source_;
  const std::string* text_;
  std::map<std::string, std::size_t> offsets_;
};

template <typename T>
T get_as(const ConfigContext& ctx, const json& j, const std::string& ptr, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    ctx.fail(ptr, std::string("expected ") + what);
  }
}

std::size_t get_positive(const ConfigContext& ctx, const json& j, const std::string& ptr) {
  if (!j.is_number_integer() || j.get<long long>() < 1) ctx.fail(ptr, "expected a positive integer");
  return j.get<std::size_t>();
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs job(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
}

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Cell of a sweep or convergence grid.
struct CellOutput {
  std::vector<ResultRow> rows;
  bool failed = false;
  std::vector<State> endpoints;
  std::size_t nfe = 0;
};

SolverConfig solver_config(const SolverSpec& s, TimeSchedule schedule) {
  SolverConfig c;
  c.method = s.method;
  c.order = s.order;
  c.use_corrector = s.corrector;
  c.schedule = std::move(schedule);
  return c;
}

ResultRow base_row(const SolverSpec& s, const ScheduleSpec& sched, std::size_t trials) {
  ResultRow r;
  r.solver = std::string(to_string(s.method));
  r.order = s.method == Method::flow ? std::to_string(s.order) : "";
  r.corrector = s.method == Method::flow && s.corrector;
  r.schedule = sched.kind == "shifted" ? "shifted(" + format_double(sched.shift) + ")" : sched.kind;
  r.trial_count = trials;
  return r;
}

// Integrates every trial; returns false on solver failure.
bool integrate_trials(const ExperimentConfig& cfg, const SolverSpec& s, std::size_t steps,
                      const std::vector<State>& inits, CellOutput& out) {
  const SolverConfig sc = solver_config(s, cfg.schedule.make(steps));
  out.endpoints.clear();
  out.endpoints.reserve(inits.size());
  try {
    for (const State& x : inits) {
      TrajectoryRecord tr = sample(sc, *cfg.field, x);
      out.nfe = tr.nfe;
      out.endpoints.push_back(std::move(tr.states.back()));
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace

std::string SolverSpec::label() const {
  if (method != Method::flow) return std::string(to_string(method));
  return "flow(s=" + std::to_string(order) + (corrector ? ",pc)" : ")");
}

TimeSchedule ScheduleSpec::make(std::size_t steps) const {
  if (kind == "shifted") return make_shifted_schedule(steps, shift);
  return make_uniform_schedule(steps);
}

std::shared_ptr<const VelocityField> make_field(const json& spec,
                                                const std::filesystem::path& base_dir) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "affine") {
    const auto rows = spec.at("A").get<std::vector<std::vector<double>>>();
    const Vector b = to_vector(spec.at("b"));
    Matrix a(static_cast<Eigen::Index>(rows.size()), b.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != static_cast<std::size_t>(b.size())) {
        throw InvalidArgument("affine field: A must be square with the size of b");
      }
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }
    return std::make_shared<AffineField>(std::move(a), b);
  }
  if (kind == "poly_time") {
    return std::make_shared<PolyTimeField>(spec.at("coeffs").get<std::vector<double>>(),
                                           spec.value("dim", std::size_t{1}));
  }
  if (kind == "gaussian_mixture") {
    std::vector<Vector> means;
    for (const auto& m : spec.at("means")) means.push_back(to_vector(m));
    return std::make_shared<GaussianMixtureFlowField>(
        spec.at("weights").get<std::vector<double>>(), std::move(means),
        spec.at("std").get<double>());
  }
  if (kind == "grid") {
    std::filesystem::path p = spec.at("path").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return std::make_shared<GridField>(load_grid_field(p));
  }
  throw InvalidArgument("unknown field kind '" + kind + "'");
}

ExperimentConfig parse_experiment_config(const json& doc, const std::string& source,
                                         const std::string* text) {
  const ConfigContext ctx(source, text);
  if (!doc.is_object()) ctx.fail("", "config must be a JSON object");
  static const std::vector<std::string> allowed{"field",   "solvers",         "schedule",
                                                "trials",  "seed",            "metrics",
                                                "output_dir", "reference_steps", "record_timing"};
  for (const auto& [k, v] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      ctx.fail("/" + k, "unknown key");
    }
  }

  ExperimentConfig cfg;
  std::filesystem::path base_dir;
  if (source != "config") base_dir = std::filesystem::path(source).parent_path();

  if (!doc.contains("field")) ctx.fail("", "missing 'field'");
  const json& field = doc["field"];
  if (!field.is_object() || !field.contains("kind") || !field["kind"].is_string()) {
    ctx.fail("/field", "field needs a string 'kind'");
  }
  cfg.field_kind = field["kind"].get<std::string>();
  try {
    cfg.field = make_field(field, base_dir);
  } catch (const FormatError& e) {
    ctx.fail("/field/path", e.what());
  } catch (const json::exception& e) {
    ctx.fail("/field", std::string("malformed field: ") + e.what());
  } catch (const std::exception& e) {
    ctx.fail("/field", e.what());
  }

  if (!doc.contains("solvers") || !doc["solvers"].is_array() || doc["solvers"].empty()) {
    ctx.fail("/solvers", "expected a non-empty array of solvers");
  }
  for (std::size_t i = 0; i < doc["solvers"].size(); ++i) {
    const json& s = doc["solvers"][i];
    const std::string ptr = "/solvers/" + std::to_string(i);
    if (!s.is_object()) ctx.fail(ptr, "expected an object");
    SolverSpec spec;
    if (!s.contains("method")) ctx.fail(ptr, "missing 'method'");
    try {
      spec.method = parse_method(get_as<std::string>(ctx, s["method"], ptr + "/method", "a string"));
    } catch (const InvalidArgument& e) {
      ctx.fail(ptr + "/method", e.what());
    }
    if (s.contains("order")) {
      if (!s["order"].is_number_integer()) ctx.fail(ptr + "/order", "expected an integer");
      spec.order = s["order"].get<int>();
      if (spec.order < 1 || spec.order > kMaxOrder) {
        ctx.fail(ptr + "/order", "order must be in [1, " + std::to_string(kMaxOrder) + "]");
      }
    }
    if (s.contains("corrector")) {
      spec.corrector = get_as<bool>(ctx, s["corrector"], ptr + "/corrector", "a boolean");
    }
    cfg.solvers.push_back(spec);
  }

  if (!doc.contains("schedule") || !doc["schedule"].is_object()) {
    ctx.fail("/schedule", "expected a schedule object");
  }
  const json& sched = doc["schedule"];
  if (sched.contains("kind")) {
    cfg.schedule.kind = get_as<std::string>(ctx, sched["kind"], "/schedule/kind", "a string");
    if (cfg.schedule.kind != "uniform" && cfg.schedule.kind != "shifted") {
      ctx.fail("/schedule/kind", "must be 'uniform' or 'shifted'");
    }
  }
  if (sched.contains("shift")) {
    cfg.schedule.shift = get_as<double>(ctx, sched["shift"], "/schedule/shift", "a number");
    if (!(cfg.schedule.shift > 0.0)) ctx.fail("/schedule/shift", "shift must be positive");
  } else if (cfg.schedule.kind == "shifted") {
    ctx.fail("/schedule", "shifted schedule needs 'shift'");
  }
  if (!sched.contains("nfe") || !sched["nfe"].is_array() || sched["nfe"].empty()) {
    ctx.fail("/schedule/nfe", "expected a non-empty array of NFE values");
  }
  for (std::size_t i = 0; i < sched["nfe"].size(); ++i) {
    cfg.schedule.nfe.push_back(
        get_positive(ctx, sched["nfe"][i], "/schedule/nfe/" + std::to_string(i)));
  }

  if (doc.contains("trials")) cfg.trials = get_positive(ctx, doc["trials"], "/trials");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0) {
      ctx.fail("/seed", "expected a non-negative integer");
    }
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("metrics")) {
    if (!doc["metrics"].is_array() || doc["metrics"].empty()) {
      ctx.fail("/metrics", "expected a non-empty array");
    }
    cfg.metrics.clear();
    for (std::size_t i = 0; i < doc["metrics"].size(); ++i) {
      const std::string ptr = "/metrics/" + std::to_string(i);
      auto name = get_as<std::string>(ctx, doc["metrics"][i], ptr, "a string");
      const auto& known = known_metrics();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        ctx.fail(ptr, "unknown metric '" + name + "'");
      }
      cfg.metrics.push_back(std::move(name));
    }
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = get_as<std::string>(ctx, doc["output_dir"], "/output_dir", "a string");
  }
  if (doc.contains("reference_steps")) {
    cfg.reference_steps = get_positive(ctx, doc["reference_steps"], "/reference_steps");
  }
  if (doc.contains("record_timing")) {
    cfg.record_timing = get_as<bool>(ctx, doc["record_timing"], "/record_timing", "a boolean");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError(path.string() + ":" + std::to_string(line_of(text, off)) +
                      ": invalid JSON: " + e.what());
  }
  return parse_experiment_config(doc, path.string(), &text);
}

State initial_noise(std::uint64_t seed, std::size_t trial, Eigen::Index dim) {
  return CounterRng(seed, trial).normal_vector(dim);
}

State reference_endpoint(const VelocityField& field, const State& x, std::size_t dense_steps) {
  if (auto exact = field.exact_flow(x, 1.0, 0.0)) return *exact;
  SolverConfig c;
  c.method = Method::rk3;
  c.schedule = make_uniform_schedule(dense_steps);
  return sample(c, field, x).states.back();
}

std::vector<State> target_samples(const VelocityField& field, std::uint64_t seed,
                                  std::size_t count) {
  const auto* gm = dynamic_cast<const GaussianMixtureFlowField*>(&field);
  if (!gm) return {};
  constexpr std::uint64_t kTargetStream = 0x7461726765740000ULL;
  const auto& w = gm->weights();
  const Eigen::Index d = static_cast<Eigen::Index>(gm->dim());
  std::vector<State> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const CounterRng rng(seed, kTargetStream + i);
    const double u = rng.uniform(0);
    std::size_t k = 0;
    double cum = w[0];
    while (k + 1 < w.size() && u >= cum) cum += w[++k];
    out.push_back(gm->means()[k] + gm->std() * rng.normal_vector(d, 1));
  }
  return out;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("FLOWSOLVE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const ExperimentConfig& cfg, std::size_t threads) {
  if (threads == 0) threads = default_thread_count();
  const Eigen::Index d = static_cast<Eigen::Index>(cfg.field->dim());

  std::vector<State> inits(cfg.trials);
  for (std::size_t i = 0; i < cfg.trials; ++i) inits[i] = initial_noise(cfg.seed, i, d);

  const bool need_reference =
      std::any_of(cfg.metrics.begin(), cfg.metrics.end(),
                  [](const std::string& m) { return m.rfind("endpoint_", 0) == 0; });
  const bool need_target =
      std::any_of(cfg.metrics.begin(), cfg.metrics.end(),
                  [](const std::string& m) { return m == "gaussian_w2" || m == "energy_distance"; });

  std::vector<State> reference;
  std::vector<State> target;
  if (need_target) target = target_samples(*cfg.field, cfg.seed, cfg.trials);
  if (need_reference || (need_target && target.empty())) {
    reference.resize(cfg.trials);
    parallel_for(cfg.trials, threads, [&](std::size_t i) {
      reference[i] = reference_endpoint(*cfg.field, inits[i], cfg.reference_steps);
    });
  }
  if (need_target && target.empty()) target = reference;
  std::optional<Moments> target_moments;
  if (need_target) target_moments = sample_moments(target);

  const std::size_t n_nfe = cfg.schedule.nfe.size();
  const std::size_t cells = cfg.solvers.size() * n_nfe;
  std::vector<CellOutput> outputs(cells);

  parallel_for(cells, threads, [&](std::size_t idx) {
    const SolverSpec& s = cfg.solvers[idx / n_nfe];
    const std::size_t budget = cfg.schedule.nfe[idx % n_nfe];
    const std::size_t steps = budget / evals_per_step(s.method);
    CellOutput& out = outputs[idx];
    const auto start = std::chrono::steady_clock::now();
    bool ok = steps > 0 && integrate_trials(cfg, s, steps, inits, out);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!ok) out.nfe = steps * evals_per_step(s.method);

    for (const std::string& metric : cfg.metrics) {
      ResultRow row = base_row(s, cfg.schedule, cfg.trials);
      row.nfe = out.nfe;
      row.metric = metric;
      if (cfg.record_timing) row.elapsed_ms = ms;
      if (ok) {
        try {
          if (metric == "endpoint_rmse") {
            row.value = endpoint_rmse(out.endpoints, reference);
          } else if (metric == "endpoint_max") {
            double worst = 0.0;
            for (std::size_t i = 0; i < out.endpoints.size(); ++i) {
              worst = std::max(worst, endpoint_error(out.endpoints[i], reference[i]));
            }
            row.value = worst;
          } else if (metric == "gaussian_w2") {
            const Moments m = sample_moments(out.endpoints);
            row.value = gaussian_w2(m.mean, m.cov, target_moments->mean, target_moments->cov);
          } else if (metric == "energy_distance") {
            row.value = energy_distance(out.endpoints, target);
          }
        } catch (const std::exception&) {
          ok = false;
        }
      }
      out.rows.push_back(std::move(row));
    }
    if (!ok) {
      for (auto& r : out.rows) r.value.reset();
      out.failed = true;
    }
  });

  SweepResult result;
  for (auto& o : outputs) {
    if (o.failed) ++result.failed_cells;
    for (auto& r : o.rows) result.rows.push_back(std::move(r));
  }
  return result;
}

ConvergenceReport run_convergence(const ExperimentConfig& cfg, std::size_t threads) {
  if (threads == 0) threads = default_thread_count();
  const Eigen::Index d = static_cast<Eigen::Index>(cfg.field->dim());
  const auto& steps = cfg.schedule.nfe;
  if (steps.size() < 4) throw ConfigError("convergence run needs at least 4 step counts");
  const double ratio = static_cast<double>(steps[1]) / static_cast<double>(steps[0]);
  for (std::size_t i = 1; i < steps.size(); ++i) {
    const double r = static_cast<double>(steps[i]) / static_cast<double>(steps[i - 1]);
    if (!(ratio > 1.0) || std::abs(r - ratio) > 1e-9 * ratio) {
      throw ConfigError("convergence step counts must form an increasing geometric progression");
    }
  }

  std::vector<State> inits(cfg.trials);
  std::vector<State> exact(cfg.trials);
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    inits[i] = initial_noise(cfg.seed, i, d);
    auto e = cfg.field->exact_flow(inits[i], 1.0, 0.0);
    if (!e) throw ConfigError("convergence run needs a field with an exact solution");
    exact[i] = std::move(*e);
  }

  const std::size_t n = steps.size();
  const std::size_t cells = cfg.solvers.size() * n;
  std::vector<CellOutput> outputs(cells);
  parallel_for(cells, threads, [&](std::size_t idx) {
    const SolverSpec& s = cfg.solvers[idx / n];
    CellOutput& out = outputs[idx];
    const auto start = std::chrono::steady_clock::now();
    const bool ok = integrate_trials(cfg, s, steps[idx % n], inits, out);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    ResultRow row = base_row(s, cfg.schedule, cfg.trials);
    row.nfe = ok ? out.nfe : steps[idx % n] * evals_per_step(s.method);
    row.metric = "endpoint_rmse";
    if (cfg.record_timing) row.elapsed_ms = ms;
    if (ok) row.value = endpoint_rmse(out.endpoints, exact);
    out.failed = !ok;
    out.rows.push_back(std::move(row));
  });

  ConvergenceReport report;
  for (std::size_t si = 0; si < cfg.solvers.size(); ++si) {
    ConvergenceEntry entry;
    entry.solver = cfg.solvers[si];
    std::vector<double> errors;
    bool failed = false;
    for (std::size_t k = 0; k < n; ++k) {
      CellOutput& o = outputs[si * n + k];
      if (o.failed) {
        ++report.failed_cells;
        failed = true;
      }
      errors.push_back(o.rows.front().value.value_or(std::nan("")));
      entry.nfe.push_back(o.rows.front().nfe);
      report.rows.push_back(o.rows.front());
    }
    if (!failed) {
      try {
        entry.fit = fit_order(steps, errors);
      } catch (const InvalidArgument&) {
        failed = true;
      }
    }
    if (failed) {
      entry.fit.step_counts = steps;
      entry.fit.errors = errors;
      entry.fit.slope = std::nan("");
      entry.fit.r_squared = std::nan("");
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.solver << ',' << r.order << ',' << yes_no(r.corrector) << ',' << r.schedule << ','
       << r.nfe << ',' << r.trial_count << ',' << r.metric << ','
       << (r.value ? format_double(*r.value) : std::string("failed")) << ','
       << (r.elapsed_ms ? format_double(*r.elapsed_ms) : std::string()) << '\n';
  }
}

void write_convergence_summary(std::ostream& os, const std::vector<ConvergenceEntry>& entries,
                               const std::string& schedule) {
  os << "solver,order,corrector,schedule,slope,r_squared,excluded_points\n";
  for (const auto& e : entries) {
    os << to_string(e.solver.method) << ','
       << (e.solver.method == Method::flow ? std::to_string(e.solver.order) : "") << ','
       << yes_no(e.solver.method == Method::flow && e.solver.corrector) << ',' << schedule << ','
       << format_double(e.fit.slope) << ',' << format_double(e.fit.r_squared) << ','
       << e.fit.excluded << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw InvalidArgument("CSV header does not match the result schema");
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    if (cols.size() != 9) {
      throw InvalidArgument("CSV line " + std::to_string(lineno) + " has " +
                            std::to_string(cols.size()) + " columns");
    }
    ResultRow r;
    r.solver = cols[0];
    r.order = cols[1];
    r.corrector = cols[2] == "true";
    r.schedule = cols[3];
    try {
      r.nfe = std::stoul(cols[4]);
      r.trial_count = std::stoul(cols[5]);
      r.metric = cols[6];
      if (cols[7] != "failed") r.value = std::stod(cols[7]);
      if (!cols[8].empty()) r.elapsed_ms = std::stod(cols[8]);
    } catch (const std::logic_error&) {
      throw InvalidArgument("CSV line " + std::to_string(lineno) + " has a malformed number");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace flowsolve
