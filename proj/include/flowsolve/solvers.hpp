#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "flowsolve/coeffs.hpp"
#include "flowsolve/core.hpp"

namespace flowsolve {

enum class Method { euler, heun, rk3, flow };

std::string_view to_string(Method m);
/// Parses "euler" | "heun" | "rk3" | "flow".
Method parse_method(std::string_view name);
/// Field evaluations per schedule interval.
std::size_t evals_per_step(Method m);

struct SolverConfig {
  Method method = Method::euler;
  /// Flow only: velocity points used by the predictor (current + order-1
  /// cached).  order = 1 is plain Euler.
  int order = 1;
  bool use_corrector = false;
  /// Flow only: while the predictor still lacks history, correct the
  /// previous endpoint even when use_corrector is off.  The correction
  /// reuses the next step's evaluation, so NFE is unchanged; without it the
  /// low-order start-up steps cap the global order at 2.
  bool warmup_correction = true;
  TimeSchedule schedule = make_uniform_schedule(1);
  bool record_coefficients = false;
};

struct TrajectoryRecord {
  std::vector<State> states;  // one per schedule time
  std::size_t nfe = 0;
  /// Flow only, when requested: the predictor coefficients of each step.
  std::vector<StepCoefficients> step_coefficients;
};

State step_euler(CountedField& field, const State& x, double t_prev, double t_next);
State step_heun(CountedField& field, const State& x, double t_prev, double t_next);
/// Kutta's third-order method: nodes 0, 1/2, 1 with weights 1/6, 4/6, 1/6.
State step_rk3(CountedField& field, const State& x, double t_prev, double t_next);

/// Multistep predictor.  `v_cur` is the velocity already evaluated at
/// (x, t_prev); the newest min(order - 1, buffer.size()) records of
/// `buffer` (all at times above t_prev) are the cached nodes.  Performs no
/// field evaluation.
State step_flow_predict(const State& x, const Vector& v_cur, double t_prev, double t_next,
                        const HistoryBuffer& buffer, int order,
                        StepCoefficients* coefficients = nullptr);

/// Corrector for the interval t_prev -> t_cur.  `buffer` is the history as
/// it stood after that interval's predictor pushed its evaluation: its
/// newest record is the velocity at t_prev, and the records below it are
/// the predictor's nodes (at most order - 1 are used).  `v_new` is the
/// velocity just evaluated at t_cur and enters as one extra node.  Returns
/// x_base + h v_prev + sum B_m D_m, where x_base is the state at t_prev.
/// The buffer is not modified.
State step_flow_correct(const State& x_base, const Vector& v_new, double t_prev,
                        double t_cur, const HistoryBuffer& buffer, int order,
                        StepCoefficients* coefficients = nullptr);

/// Integrates x_init along config.schedule.  For the flow method each
/// step evaluates the field once at the current state, optionally corrects
/// the previous endpoint with that evaluation, predicts, and caches the
/// evaluation.  The predictor's effective order ramps up as history
/// accumulates; the final endpoint is never corrected (that would cost an
/// extra evaluation).  `warm_history`, when given, seeds the cache with records at
/// times above schedule[0] (e.g. from an earlier part of the same grid).
TrajectoryRecord sample(const SolverConfig& config, const VelocityField& field,
                        const State& x_init, const HistoryBuffer* warm_history = nullptr);

}  // namespace flowsolve
