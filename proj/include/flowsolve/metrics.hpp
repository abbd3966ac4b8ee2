#pragma once

#include <cstddef>
#include <vector>

#include "flowsolve/core.hpp"

namespace flowsolve {

enum class Norm { l2, linf };

double endpoint_error(const State& approx, const State& exact, Norm norm = Norm::l2);

/// Root-mean-square of per-sample L2 endpoint errors.
double endpoint_rmse(const std::vector<State>& approx, const std::vector<State>& exact);

/// Errors below this are treated as round-off and left out of order fits.
inline constexpr double kErrorFloor = 1e-13;

struct ConvergenceResult {
  std::vector<std::size_t> step_counts;
  std::vector<double> errors;
  double slope = 0.0;      // least-squares slope of log(error) vs log(1/N)
  double r_squared = 0.0;
  std::size_t excluded = 0;  // points dropped for being at or below kErrorFloor
};

/// Fits error ~ K h^slope with h = 1/N.  Needs at least three usable points
/// and strictly increasing step counts.
ConvergenceResult fit_order(const std::vector<std::size_t>& step_counts,
                            const std::vector<double>& errors);

/// Squared 2-Wasserstein distance between two Gaussians:
///   |mu_a - mu_b|^2 + tr(Ca + Cb - 2 (Cb^1/2 Ca Cb^1/2)^1/2).
/// Matrix square roots come from symmetric eigendecompositions with
/// eigenvalues clamped at zero.
double gaussian_w2(const Vector& mean_a, const Matrix& cov_a, const Vector& mean_b,
                   const Matrix& cov_b);

/// Square root of a symmetric PSD matrix (eigenvalues below 1e-12 clamped to 0).
Matrix psd_sqrt(const Matrix& m);

struct Moments {
  Vector mean;
  Matrix cov;  // maximum-likelihood (divide by n)
};
Moments sample_moments(const std::vector<State>& samples);

/// 2 E|A - B| - E|A - A'| - E|B - B'| over all ordered pairs (V-statistic).
double energy_distance(const std::vector<State>& samples_a, const std::vector<State>& samples_b);

}  // namespace flowsolve
