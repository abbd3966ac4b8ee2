#include "flowsolve/solvers.hpp"

#include <algorithm>
#include <string>

namespace flowsolve {

namespace {

void check_direction(double t_prev, double t_next) {
  if (!(t_next < t_prev)) {
    throw InvalidArgument("step requires t_next < t_prev (got " + std::to_string(t_prev) +
                          " -> " + std::to_string(t_next) + ")");
  }
}

Vector checked_eval(CountedField& field, const State& x, double t) {
  Vector v = field.eval(x, t);
  if (v.size() != x.size()) {
    throw InvalidArgument("field returned dimension " + std::to_string(v.size()) +
                          ", expected " + std::to_string(x.size()));
  }
  if (!all_finite(v)) {
    throw NumericalFailure("non-finite velocity at t=" + std::to_string(t), t);
  }
  return v;
}

// Shared by step_euler and the history-free flow predictor so both produce
// the same bits.
State euler_update(const State& x, double h, const Vector& v) { return x + h * v; }

std::vector<double> newest_times(const HistoryBuffer& buffer, std::size_t skip,
                                 std::size_t count) {
  std::vector<double> times;
  times.reserve(count);
  for (std::size_t k = 0; k < count; ++k) times.push_back(buffer.newest(skip + k).t);
  return times;
}

void check_order(int order) {
  if (order < 1 || order > kMaxOrder) {
    throw InvalidArgument("flow order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::euler: return "euler";
    case Method::heun: return "heun";
    case Method::rk3: return "rk3";
    case Method::flow: return "flow";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "euler") return Method::euler;
  if (name == "heun") return Method::heun;
  if (name == "rk3") return Method::rk3;
  if (name == "flow") return Method::flow;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::size_t evals_per_step(Method m) {
  switch (m) {
    case Method::heun: return 2;
    case Method::rk3: return 3;
    default: return 1;
  }
}

State step_euler(CountedField& field, const State& x, double t_prev, double t_next) {
  check_direction(t_prev, t_next);
  const Vector v = checked_eval(field, x, t_prev);
  return euler_update(x, t_next - t_prev, v);
}

State step_heun(CountedField& field, const State& x, double t_prev, double t_next) {
  check_direction(t_prev, t_next);
  const double h = t_next - t_prev;
  const Vector v0 = checked_eval(field, x, t_prev);
  const State x_hat = euler_update(x, h, v0);
  const Vector v1 = checked_eval(field, x_hat, t_next);
  return x + 0.5 * h * (v0 + v1);
}

State step_rk3(CountedField& field, const State& x, double t_prev, double t_next) {
  check_direction(t_prev, t_next);
  const double h = t_next - t_prev;
  const Vector k1 = checked_eval(field, x, t_prev);
  const Vector k2 = checked_eval(field, x + 0.5 * h * k1, t_prev + 0.5 * h);
  const Vector k3 = checked_eval(field, x - h * k1 + 2.0 * h * k2, t_next);
  return x + (h / 6.0) * (k1 + 4.0 * k2 + k3);
}

State step_flow_predict(const State& x, const Vector& v_cur, double t_prev, double t_next,
                        const HistoryBuffer& buffer, int order,
                        StepCoefficients* coefficients) {
  check_direction(t_prev, t_next);
  check_order(order);
  const std::size_t used =
      std::min(static_cast<std::size_t>(order - 1), buffer.size());
  const double h = t_next - t_prev;
  if (used == 0) {
    if (coefficients) *coefficients = StepCoefficients{h, {}, {}, {}};
    return euler_update(x, h, v_cur);
  }
  StepCoefficients sc = predictor_coefficients(t_prev, t_next, newest_times(buffer, 0, used));
  State out = euler_update(x, h, v_cur);
  for (std::size_t m = 0; m < used; ++m) {
    out += sc.b[m] * (buffer.newest(m).v - v_cur);
  }
  if (coefficients) *coefficients = std::move(sc);
  return out;
}

State step_flow_correct(const State& x_base, const Vector& v_new, double t_prev,
                        double t_cur, const HistoryBuffer& buffer, int order,
                        StepCoefficients* coefficients) {
  check_direction(t_prev, t_cur);
  check_order(order);
  if (buffer.empty()) throw InvalidState("corrector needs the previous evaluation in history");
  const VelocityEvalRecord& base = buffer.newest(0);
  if (base.t != t_prev) {
    throw InvalidState("newest history record is not at t_prev");
  }
  const std::size_t used =
      std::min(static_cast<std::size_t>(order - 1), buffer.size() - 1);
  StepCoefficients sc =
      corrector_coefficients(t_prev, t_cur, newest_times(buffer, 1, used));
  State out = euler_update(x_base, sc.h, base.v);
  out += sc.b[0] * (v_new - base.v);
  for (std::size_t m = 0; m < used; ++m) {
    out += sc.b[m + 1] * (buffer.newest(m + 1).v - base.v);
  }
  if (coefficients) *coefficients = std::move(sc);
  return out;
}

namespace {

TrajectoryRecord sample_flow(const SolverConfig& config, CountedField& field,
                             const State& x_init, const HistoryBuffer* warm_history) {
  const TimeSchedule& sched = config.schedule;
  check_order(config.order);
  HistoryBuffer buffer(static_cast<std::size_t>(config.order));
  if (warm_history) {
    for (const auto& r : warm_history->records()) {
      if (!(r.t > sched[0])) {
        throw InvalidArgument("warm history must lie before the schedule start");
      }
      buffer.push(r);
    }
  }

  TrajectoryRecord out;
  out.states.reserve(sched.size());
  out.states.push_back(x_init);

  const auto full_history = static_cast<std::size_t>(config.order - 1);
  std::size_t prev_used = full_history;  // nodes the previous predictor used
  for (std::size_t n = 1; n < sched.size(); ++n) {
    try {
      const double t_prev = sched[n - 1];
      const double t_next = sched[n];
      const Vector v = checked_eval(field, out.states[n - 1], t_prev);
      const bool correct =
          config.use_corrector || (config.warmup_correction && prev_used < full_history);
      if (correct && n >= 2) {
        out.states[n - 1] = step_flow_correct(out.states[n - 2], v, sched[n - 2], t_prev,
                                              buffer, config.order);
        if (!all_finite(out.states[n - 1])) {
          throw NumericalFailure("non-finite corrected state at t=" + std::to_string(t_prev),
                                 t_prev);
        }
      }
      StepCoefficients sc;
      State next = step_flow_predict(out.states[n - 1], v, t_prev, t_next, buffer,
                                     config.order,
                                     config.record_coefficients ? &sc : nullptr);
      if (!all_finite(next)) {
        throw NumericalFailure("non-finite state at t=" + std::to_string(t_next), t_next);
      }
      prev_used = std::min(full_history, buffer.size());
      buffer.push({t_prev, v, out.states[n - 1]});
      out.states.push_back(std::move(next));
      if (config.record_coefficients) out.step_coefficients.push_back(std::move(sc));
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(n, e.what());
    }
  }
  out.nfe = field.nfe_count();
  return out;
}

}  // namespace

TrajectoryRecord sample(const SolverConfig& config, const VelocityField& field,
                        const State& x_init, const HistoryBuffer* warm_history) {
  if (static_cast<std::size_t>(x_init.size()) != field.dim()) {
    throw InvalidArgument("initial state dimension " + std::to_string(x_init.size()) +
                          " does not match field dimension " + std::to_string(field.dim()));
  }
  if (!all_finite(x_init)) throw NumericalFailure("initial state is not finite", config.schedule[0]);
  CountedField counted(field);
  if (config.method == Method::flow) {
    return sample_flow(config, counted, x_init, warm_history);
  }

  const TimeSchedule& sched = config.schedule;
  TrajectoryRecord out;
  out.states.reserve(sched.size());
  out.states.push_back(x_init);
  for (std::size_t n = 1; n < sched.size(); ++n) {
    try {
      const State& x = out.states[n - 1];
      State next;
      switch (config.method) {
        case Method::euler: next = step_euler(counted, x, sched[n - 1], sched[n]); break;
        case Method::heun: next = step_heun(counted, x, sched[n - 1], sched[n]); break;
        case Method::rk3: next = step_rk3(counted, x, sched[n - 1], sched[n]); break;
        case Method::flow: break;
      }
      if (!all_finite(next)) {
        throw NumericalFailure("non-finite state at t=" + std::to_string(sched[n]), sched[n]);
      }
      out.states.push_back(std::move(next));
    } catch (const std::exception& e) {
      throw StepError(n, e.what());
    }
  }
  out.nfe = counted.nfe_count();
  return out;
}

}  // namespace flowsolve
