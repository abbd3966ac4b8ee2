#include "flowsolve/coeffs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "flowsolve/errors.hpp"

namespace flowsolve {

namespace {

void check_order(std::size_t p) {
  if (p > static_cast<std::size_t>(kMaxOrder)) {
    throw InvalidArgument("interpolation order " + std::to_string(p) + " exceeds " +
                          std::to_string(kMaxOrder));
  }
}

}  // namespace

std::vector<double> compute_c(double t_prev, double t_next, int p) {
  if (p < 0 || p > kMaxOrder) {
    throw InvalidArgument("order must be in [0, " + std::to_string(kMaxOrder) + "]");
  }
  if (t_next == t_prev) throw InvalidArgument("compute_c: coincident times");
  const double h = t_next - t_prev;
  std::vector<double> c(static_cast<std::size_t>(p));
  double power = h;
  for (int i = 1; i <= p; ++i) {
    power *= h;
    c[static_cast<std::size_t>(i - 1)] = power / static_cast<double>(i + 1);
  }
  return c;
}

double interpolation_residual(std::span<const double> deltas, std::span<const double> c,
                              std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double sum = 0.0;
    for (std::size_t m = 0; m < deltas.size(); ++m) {
      sum += b[m] * std::pow(deltas[m], static_cast<double>(i + 1));
    }
    worst = std::max(worst, std::abs(sum - c[i]));
  }
  return worst;
}

std::vector<double> solve_b(std::span<const double> deltas, std::span<const double> c) {
  const std::size_t p = deltas.size();
  if (c.size() != p) throw InvalidArgument("solve_b: deltas and c differ in length");
  check_order(p);
  for (std::size_t m = 0; m < p; ++m) {
    if (deltas[m] == 0.0 || !std::isfinite(deltas[m])) {
      throw SingularSystem("solve_b: node " + std::to_string(m) + " is zero or non-finite");
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (deltas[k] == deltas[m]) {
        throw SingularSystem("solve_b: nodes " + std::to_string(k) + " and " +
                             std::to_string(m) + " coincide");
      }
    }
  }
  if (p == 0) return {};

  // Row i holds deltas^(i+1); augmented column p holds C_(i+1).
  std::array<std::array<double, kMaxOrder + 1>, kMaxOrder> a{};
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t m = 0; m < p; ++m) {
      a[i][m] = std::pow(deltas[m], static_cast<double>(i + 1));
    }
    a[i][p] = c[i];
  }

  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw SingularSystem("solve_b: zero pivot");
    std::swap(a[pivot], a[col]);
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= p; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::vector<double> b(p);
  for (std::size_t i = p; i-- > 0;) {
    double s = a[i][p];
    for (std::size_t k = i + 1; k < p; ++k) s -= a[i][k] * b[k];
    b[i] = s / a[i][i];
  }

  const double residual = interpolation_residual(deltas, c, b);
  if (!(residual <= kResidualTolerance)) {
    throw NumericalFailure("solve_b: residual " + std::to_string(residual) +
                           " exceeds tolerance");
  }
  return b;
}

StepCoefficients predictor_coefficients(double t_prev, double t_next,
                                        std::span<const double> history_times) {
  StepCoefficients out;
  out.h = t_next - t_prev;
  out.deltas.reserve(history_times.size());
  for (double t : history_times) {
    const double d = t - t_prev;
    if (!(d > 0.0)) throw InvalidArgument("predictor history node is not before t_prev");
    if (!out.deltas.empty() && !(d > out.deltas.back())) {
      throw InvalidArgument("predictor history nodes must be ordered newest first");
    }
    out.deltas.push_back(d);
  }
  out.c = compute_c(t_prev, t_next, static_cast<int>(out.deltas.size()));
  out.b = solve_b(out.deltas, out.c);
  return out;
}

StepCoefficients corrector_coefficients(double t_prev, double t_next,
                                        std::span<const double> history_times) {
  StepCoefficients out;
  out.h = t_next - t_prev;
  out.deltas.reserve(history_times.size() + 1);
  out.deltas.push_back(out.h);
  for (double t : history_times) {
    const double d = t - t_prev;
    if (!(d > 0.0)) throw InvalidArgument("corrector history node is not before t_prev");
    out.deltas.push_back(d);
  }
  out.c = compute_c(t_prev, t_next, static_cast<int>(out.deltas.size()));
  out.b = solve_b(out.deltas, out.c);
  return out;
}

std::vector<double> node_weights(const StepCoefficients& coeffs) {
  std::vector<double> w(coeffs.b.size() + 1);
  w[0] = coeffs.h;
  for (std::size_t m = 0; m < coeffs.b.size(); ++m) {
    w[0] -= coeffs.b[m];
    w[m + 1] = coeffs.b[m];
  }
  return w;
}

}  // namespace flowsolve
