#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "flowsolve/core.hpp"

namespace flowsolve {

/// v(x, t) = sum_i a_i t^i, independent of x, broadcast to every component.
class PolyTimeField final : public VelocityField {
 public:
  PolyTimeField(std::vector<double> coeffs, std::size_t dim);

  std::size_t dim() const override { return dim_; }
  Vector evaluate(const Vector& x, double t) const override;
  std::optional<Vector> exact_flow(const Vector& x, double t_from, double t_to) const override;

  /// x1 + sum_i a_i (t_to^(i+1) - t_from^(i+1)) / (i+1).
  State exact_endpoint(const State& x1, double t_from, double t_to) const;
  double value(double t) const;
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

 private:
  std::vector<double> coeffs_;
  std::size_t dim_;
};

/// exp(M) by scaling and squaring with a truncated Taylor series.  The
/// series stops once a term is below tol / 2^s relative to the partial sum,
/// s being the number of squarings.
Matrix matrix_exponential(const Matrix& m, double tol = 1e-12);

/// v(x, t) = A x + b.
class AffineField final : public VelocityField {
 public:
  AffineField(Matrix a, Vector b);

  std::size_t dim() const override { return static_cast<std::size_t>(b_.size()); }
  Vector evaluate(const Vector& x, double t) const override;
  std::optional<Vector> exact_flow(const Vector& x, double t_from, double t_to) const override;

  /// Exact solution through the augmented generator [[A, b], [0, 0]].
  State exact_endpoint(const State& x, double t_from, double t_to) const;
  const Matrix& a() const noexcept { return a_; }
  const Vector& b() const noexcept { return b_; }

 private:
  Matrix a_;
  Vector b_;
};

/// Exact marginal velocity of the rectified-flow path
///   x_t = t x1 + (1 - t) x0,   x1 ~ N(0, I),   x0 ~ sum_k w_k N(mu_k, sigma0^2 I).
///
/// Given component k, (x0, x1, x_t) are jointly Gaussian with
///   x_t | k ~ N((1 - t) mu_k, s_t I),     s_t = (1 - t)^2 sigma0^2 + t^2,
///   Cov(x1, x_t) = t I,                    Cov(x0, x_t) = (1 - t) sigma0^2 I,
/// so conditioning gives
///   E[x1 - x0 | x_t = x, k] = (t - (1 - t) sigma0^2) / s_t * (x - (1 - t) mu_k) - mu_k.
/// The field is the responsibility-weighted sum of these per-component
/// velocities, with r_k proportional to w_k N(x; (1 - t) mu_k, s_t I)
/// normalised by log-sum-exp.  At t = 0 this reduces to v = -x.
class GaussianMixtureFlowField final : public VelocityField {
 public:
  GaussianMixtureFlowField(std::vector<double> weights, std::vector<Vector> means, double std);

  std::size_t dim() const override { return static_cast<std::size_t>(means_.front().size()); }
  Vector evaluate(const Vector& x, double t) const override;

  /// Posterior component probabilities at (x, t).
  Vector responsibilities(const Vector& x, double t) const;

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Vector>& means() const noexcept { return means_; }
  double std() const noexcept { return std_; }

 private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<Vector> means_;
  double std_;
};

/// Header of a grid-field file.
struct GridSpec {
  int dim = 1;  // 1 or 2: state dimension, also the number of x axes
  std::vector<double> x_min;
  std::vector<double> x_max;
  std::vector<std::size_t> x_points;
  double t_min = 0.0;
  double t_max = 1.0;
  std::size_t t_points = 2;

  /// Number of float values in the payload.
  std::size_t value_count() const;
};

/// Velocity sampled on a uniform (t, x_1[, x_2]) grid, multilinearly
/// interpolated.  Queries outside the grid throw InvalidArgument.
class GridField final : public VelocityField {
 public:
  GridField(GridSpec spec, std::vector<float> values);

  std::size_t dim() const override { return static_cast<std::size_t>(spec_.dim); }
  Vector evaluate(const Vector& x, double t) const override;

  const GridSpec& spec() const noexcept { return spec_; }
  const std::vector<float>& values() const noexcept { return values_; }

 private:
  GridSpec spec_;
  std::vector<float> values_;
};

/// File layout (little-endian):
///   "FLOWGRID" | u32 header length | UTF-8 JSON header | float32 payload
/// Payload is row-major with t outermost, then x axes, then the vector
/// component.
GridField load_grid_field(const std::filesystem::path& path);
void save_grid_field(const std::filesystem::path& path, const GridSpec& spec,
                     const std::vector<float>& values);

}  // namespace flowsolve
