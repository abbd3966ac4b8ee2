#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flowsolve {

inline constexpr int kMaxOrder = 4;
inline constexpr double kResidualTolerance = 1e-10;

/// Coefficients of one multistep update on a possibly non-uniform grid.
///
/// The update is x_next = x_prev + h * v_prev + sum_m b[m] * (v_m - v_prev),
/// where node m sits at time t_prev + deltas[m].  For the predictor all
/// deltas are positive (earlier, larger times); the corrector additionally
/// uses the node at t_next, whose delta equals h.
struct StepCoefficients {
  double h = 0.0;
  std::vector<double> deltas;
  std::vector<double> c;  // C_1..C_p
  std::vector<double> b;  // B_1..B_p

  std::size_t order() const noexcept { return b.size(); }
};

/// Taylor-integral coefficients C_i = h^(i+1) / (i+1), i = 1..p, with
/// h = t_next - t_prev.  p = 0 returns an empty vector.
std::vector<double> compute_c(double t_prev, double t_next, int p);

/// Solves sum_m B_m * deltas[m]^i = C_i for i = 1..p by Gaussian
/// elimination with partial pivoting.  Throws SingularSystem for a zero or
/// repeated node and NumericalFailure if the max-norm residual exceeds
/// kResidualTolerance.
std::vector<double> solve_b(std::span<const double> deltas, std::span<const double> c);

/// Max-norm residual of the interpolation system for a given solution.
double interpolation_residual(std::span<const double> deltas, std::span<const double> c,
                              std::span<const double> b);

/// Predictor coefficients for the step t_prev -> t_next using cached nodes
/// at `history_times` (newest first, each strictly greater than t_prev).
StepCoefficients predictor_coefficients(double t_prev, double t_next,
                                        std::span<const double> history_times);

/// Corrector coefficients for the interval t_prev -> t_next: the history
/// nodes plus an extra node at t_next.
StepCoefficients corrector_coefficients(double t_prev, double t_next,
                                        std::span<const double> history_times);

/// Expands an update into plain per-node weights: result[0] multiplies the
/// base velocity v_prev, result[m + 1] multiplies the velocity at node m.
std::vector<double> node_weights(const StepCoefficients& coeffs);

}  // namespace flowsolve
