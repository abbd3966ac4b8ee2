#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "flowsolve/errors.hpp"

namespace flowsolve {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A sample x_t.  Plain dense vector; finiteness is checked by the solvers.
using State = Vector;

bool all_finite(const Vector& v);

/// Strictly decreasing sequence of times.  A full schedule runs 1 -> 0.
class TimeSchedule {
 public:
  /// Validates strict decrease and finiteness.  Unless `partial` is set the
  /// endpoints must be exactly 1.0 and 0.0.
  explicit TimeSchedule(std::vector<double> times, bool partial = false);

  std::size_t steps() const noexcept { return times_.size() - 1; }
  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  std::span<const double> times() const noexcept { return times_; }
  /// Signed gap times[n] - times[n-1], n >= 1.  Always negative.
  double gap(std::size_t n) const { return times_.at(n) - times_.at(n - 1); }
  bool is_partial() const noexcept { return partial_; }

 private:
  std::vector<double> times_;
  bool partial_;
};

TimeSchedule make_uniform_schedule(std::size_t n_steps);

/// Timestep-shift warp t = s(1-u) / (1 + (s-1)(1-u)) applied to a uniform
/// grid u.  shift > 1 concentrates steps near t = 1.
TimeSchedule make_shifted_schedule(std::size_t n_steps, double shift);

struct VelocityEvalRecord {
  double t = 0.0;
  Vector v;  // velocity at (x, t)
  Vector x;  // state the velocity was evaluated at
};

/// Bounded FIFO of past velocity evaluations, newest last.  Record times
/// must strictly decrease in insertion order.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(std::size_t capacity);

  /// Appends, evicting the oldest record when full.
  void push(VelocityEvalRecord record);
  /// Removes and returns the newest record.
  VelocityEvalRecord pop_newest();

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  /// k-th newest record, k = 0 is the newest.
  const VelocityEvalRecord& newest(std::size_t k = 0) const;
  const std::deque<VelocityEvalRecord>& records() const noexcept { return records_; }

 private:
  std::deque<VelocityEvalRecord> records_;
  std::size_t capacity_;
};

/// The ODE right-hand side v(x, t).  Implementations are immutable and
/// safe to evaluate concurrently; NFE counting lives in CountedField so
/// that each run owns its own counter.
class VelocityField {
 public:
  virtual ~VelocityField() = default;

  virtual std::size_t dim() const = 0;
  virtual Vector evaluate(const Vector& x, double t) const = 0;

  /// Exact solution of dx/dt = v from (x, t_from) to t_to when known in
  /// closed form.
  virtual std::optional<Vector> exact_flow(const Vector& /*x*/, double /*t_from*/,
                                           double /*t_to*/) const {
    return std::nullopt;
  }
};

/// Per-run view of a field that counts evaluations.
class CountedField {
 public:
  explicit CountedField(const VelocityField& field) : field_(&field) {}

  Vector eval(const Vector& x, double t) {
    ++nfe_;
    return field_->evaluate(x, t);
  }
  std::size_t nfe_count() const noexcept { return nfe_; }
  std::size_t dim() const { return field_->dim(); }
  const VelocityField& field() const noexcept { return *field_; }

 private:
  const VelocityField* field_;
  std::size_t nfe_ = 0;
};

}  // namespace flowsolve
