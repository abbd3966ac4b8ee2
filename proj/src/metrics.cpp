#include "flowsolve/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace flowsolve {

namespace {

constexpr double kEigenClamp = 1e-12;

void check_same_dim(const State& a, const State& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

void check_symmetric(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) throw InvalidArgument(std::string(name) + " is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument(std::string(name) + " is not symmetric");
  }
}

double mean_pairwise_distance(const std::vector<State>& a, const std::vector<State>& b) {
  double total = 0.0;
  for (const State& x : a) {
    double row = 0.0;
    for (const State& y : b) row += (x - y).norm();
    total += row;
  }
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace

double endpoint_error(const State& approx, const State& exact, Norm norm) {
  check_same_dim(approx, exact);
  const Vector diff = approx - exact;
  return norm == Norm::l2 ? diff.norm() : diff.cwiseAbs().maxCoeff();
}

double endpoint_rmse(const std::vector<State>& approx, const std::vector<State>& exact) {
  if (approx.size() != exact.size() || approx.empty()) {
    throw InvalidArgument("endpoint_rmse: sample sets must be non-empty and equal in size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    check_same_dim(approx[i], exact[i]);
    sum += (approx[i] - exact[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(approx.size()));
}

ConvergenceResult fit_order(const std::vector<std::size_t>& step_counts,
                            const std::vector<double>& errors) {
  if (step_counts.size() != errors.size()) {
    throw InvalidArgument("fit_order: step_counts and errors differ in length");
  }
  for (std::size_t i = 1; i < step_counts.size(); ++i) {
    if (!(step_counts[i] > step_counts[i - 1])) {
      throw InvalidArgument("fit_order: step counts must be strictly increasing");
    }
  }
  ConvergenceResult out{step_counts, errors, 0.0, 0.0, 0};
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (step_counts[i] == 0) throw InvalidArgument("fit_order: step count must be positive");
    if (!(errors[i] > kErrorFloor) || !std::isfinite(errors[i])) {
      ++out.excluded;
      continue;
    }
    xs.push_back(-std::log(static_cast<double>(step_counts[i])));
    ys.push_back(std::log(errors[i]));
  }
  if (xs.size() < 3) {
    throw InvalidArgument("fit_order: fewer than 3 usable points");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  out.slope = sxy / sxx;
  out.r_squared = syy > 0.0 ? std::min(1.0, (sxy * sxy) / (sxx * syy)) : 1.0;
  return out;
}

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed");
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) > kEigenClamp ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double gaussian_w2(const Vector& mean_a, const Matrix& cov_a, const Vector& mean_b,
                   const Matrix& cov_b) {
  check_same_dim(mean_a, mean_b);
  check_symmetric(cov_a, "cov_a");
  check_symmetric(cov_b, "cov_b");
  if (cov_a.rows() != mean_a.size() || cov_b.rows() != mean_b.size()) {
    throw InvalidArgument("gaussian_w2: covariance and mean dimensions differ");
  }
  const Matrix root_b = psd_sqrt(cov_b);
  Matrix cross = root_b * cov_a * root_b;
  cross = 0.5 * (cross + cross.transpose());
  const double trace_term = cov_a.trace() + cov_b.trace() - 2.0 * psd_sqrt(cross).trace();
  return std::max(0.0, (mean_a - mean_b).squaredNorm() + trace_term);
}

Moments sample_moments(const std::vector<State>& samples) {
  if (samples.empty()) throw InvalidArgument("sample_moments: empty sample set");
  const Eigen::Index d = samples.front().size();
  Vector mean = Vector::Zero(d);
  for (const State& s : samples) {
    if (s.size() != d) throw InvalidArgument("sample_moments: dimension mismatch");
    mean += s;
  }
  mean /= static_cast<double>(samples.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const State& s : samples) {
    const Vector c = s - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(samples.size());
  return {mean, cov};
}

double energy_distance(const std::vector<State>& samples_a,
                       const std::vector<State>& samples_b) {
  if (samples_a.empty() || samples_b.empty()) {
    throw InvalidArgument("energy_distance: empty sample set");
  }
  const Eigen::Index d = samples_a.front().size();
  for (const auto* set : {&samples_a, &samples_b}) {
    for (const State& s : *set) {
      if (s.size() != d) throw InvalidArgument("energy_distance: dimension mismatch");
    }
  }
  const double ab = mean_pairwise_distance(samples_a, samples_b);
  const double aa = mean_pairwise_distance(samples_a, samples_a);
  const double bb = mean_pairwise_distance(samples_b, samples_b);
  // non-negative in exact arithmetic; clamp round-off
  return std::max(0.0, 2.0 * ab - aa - bb);
}

}  // namespace flowsolve
