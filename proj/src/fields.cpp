#include "flowsolve/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace flowsolve {

PolyTimeField::PolyTimeField(std::vector<double> coeffs, std::size_t dim)
    : coeffs_(std::move(coeffs)), dim_(dim) {
  if (coeffs_.empty()) throw InvalidArgument("PolyTimeField needs at least one coefficient");
  if (dim_ == 0) throw InvalidArgument("PolyTimeField dimension must be positive");
}

double PolyTimeField::value(double t) const {
  // Horner
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Vector PolyTimeField::evaluate(const Vector& x, double t) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw InvalidArgument("PolyTimeField: state dimension mismatch");
  }
  return Vector::Constant(static_cast<Eigen::Index>(dim_), value(t));
}

State PolyTimeField::exact_endpoint(const State& x1, double t_from, double t_to) const {
  double delta = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    delta += coeffs_[i] * (std::pow(t_to, k) - std::pow(t_from, k)) / k;
  }
  return x1.array() + delta;
}

std::optional<Vector> PolyTimeField::exact_flow(const Vector& x, double t_from,
                                                double t_to) const {
  return exact_endpoint(x, t_from, t_to);
}

Matrix matrix_exponential(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw InvalidArgument("matrix_exponential: matrix is not square");
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = m / std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix term = result;
  for (int k = 1; k < 64; ++k) {
    term = term * scaled / static_cast<double>(k);
    result += term;
    // squaring amplifies the truncation error by roughly 2^squarings
    if (term.cwiseAbs().maxCoeff() <=
        std::ldexp(tol, -squarings) * result.cwiseAbs().maxCoeff()) {
      break;
    }
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

AffineField::AffineField(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (b_.size() == 0) throw InvalidArgument("AffineField dimension must be positive");
  if (a_.rows() != b_.size() || a_.cols() != b_.size()) {
    throw InvalidArgument("AffineField: A must be d x d with d = len(b)");
  }
}

Vector AffineField::evaluate(const Vector& x, double /*t*/) const {
  if (x.size() != b_.size()) throw InvalidArgument("AffineField: state dimension mismatch");
  return a_ * x + b_;
}

State AffineField::exact_endpoint(const State& x, double t_from, double t_to) const {
  const Eigen::Index d = b_.size();
  Matrix gen = Matrix::Zero(d + 1, d + 1);
  gen.topLeftCorner(d, d) = a_;
  gen.topRightCorner(d, 1) = b_;
  const Matrix e = matrix_exponential((t_to - t_from) * gen);
  Vector aug(d + 1);
  aug.head(d) = x;
  aug(d) = 1.0;
  return (e * aug).head(d);
}

std::optional<Vector> AffineField::exact_flow(const Vector& x, double t_from,
                                              double t_to) const {
  return exact_endpoint(x, t_from, t_to);
}

GaussianMixtureFlowField::GaussianMixtureFlowField(std::vector<double> weights,
                                                   std::vector<Vector> means, double std)
    : weights_(std::move(weights)), means_(std::move(means)), std_(std) {
  if (means_.empty()) throw InvalidArgument("mixture needs at least one component");
  if (weights_.size() != means_.size()) {
    throw InvalidArgument("mixture weights and means differ in count");
  }
  if (!(std_ > 0.0) || !std::isfinite(std_)) {
    throw InvalidArgument("mixture std must be positive");
  }
  const Eigen::Index d = means_.front().size();
  if (d == 0) throw InvalidArgument("mixture dimension must be positive");
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (!(weights_[k] > 0.0)) throw InvalidArgument("mixture weights must be positive");
    if (means_[k].size() != d) throw InvalidArgument("mixture means differ in dimension");
    if (!all_finite(means_[k])) throw InvalidArgument("mixture mean is not finite");
    total += weights_[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mixture weights must sum to 1");
  log_weights_.reserve(weights_.size());
  for (double w : weights_) log_weights_.push_back(std::log(w));
}

Vector GaussianMixtureFlowField::responsibilities(const Vector& x, double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("mixture field: t=" + std::to_string(t) + " outside [0, 1]");
  }
  if (x.size() != means_.front().size()) {
    throw InvalidArgument("mixture field: state dimension mismatch");
  }
  const double u = 1.0 - t;
  const double var = u * u * std_ * std_ + t * t;
  const std::size_t k_count = means_.size();
  Vector logits(static_cast<Eigen::Index>(k_count));
  // shared normalisation constants cancel
  for (std::size_t k = 0; k < k_count; ++k) {
    logits(static_cast<Eigen::Index>(k)) =
        log_weights_[k] - 0.5 * (x - u * means_[k]).squaredNorm() / var;
  }
  const double peak = logits.maxCoeff();
  Vector r = (logits.array() - peak).exp();
  return r / r.sum();
}

Vector GaussianMixtureFlowField::evaluate(const Vector& x, double t) const {
  const Vector r = responsibilities(x, t);
  const double u = 1.0 - t;
  const double var = u * u * std_ * std_ + t * t;
  const double gain = (t - u * std_ * std_) / var;
  Vector mean_shift = Vector::Zero(x.size());
  for (std::size_t k = 0; k < means_.size(); ++k) {
    mean_shift += r(static_cast<Eigen::Index>(k)) * means_[k];
  }
  // sum_k r_k [gain (x - u mu_k) - mu_k] = gain x - (gain u + 1) sum_k r_k mu_k
  return gain * x - (gain * u + 1.0) * mean_shift;
}

}  // namespace flowsolve
