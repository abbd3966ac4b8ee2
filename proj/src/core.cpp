#include "flowsolve/core.hpp"

#include <cmath>
#include <string>

namespace flowsolve {

bool all_finite(const Vector& v) { return v.allFinite(); }

TimeSchedule::TimeSchedule(std::vector<double> times, bool partial)
    : times_(std::move(times)), partial_(partial) {
  if (times_.size() < 2) {
    throw InvalidArgument("schedule needs at least two times");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) {
      throw InvalidArgument("schedule time " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(times_[i] < times_[i - 1])) {
      throw InvalidArgument("schedule must be strictly decreasing at index " +
                            std::to_string(i));
    }
  }
  if (!partial_ && (times_.front() != 1.0 || times_.back() != 0.0)) {
    throw InvalidArgument("full schedule must run from 1.0 to 0.0");
  }
}

TimeSchedule make_uniform_schedule(std::size_t n_steps) {
  if (n_steps == 0) throw InvalidArgument("n_steps must be at least 1");
  std::vector<double> times(n_steps + 1);
  const double n = static_cast<double>(n_steps);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    times[k] = static_cast<double>(n_steps - k) / n;
  }
  return TimeSchedule(std::move(times));
}

TimeSchedule make_shifted_schedule(std::size_t n_steps, double shift) {
  if (n_steps == 0) throw InvalidArgument("n_steps must be at least 1");
  if (!(shift > 0.0) || !std::isfinite(shift)) {
    throw InvalidArgument("shift must be positive and finite");
  }
  std::vector<double> times(n_steps + 1);
  const double n = static_cast<double>(n_steps);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double s = static_cast<double>(n_steps - k) / n;  // 1 - u
    times[k] = shift * s / (1.0 + (shift - 1.0) * s);
  }
  // the warp fixes both endpoints; pin them against rounding
  times.front() = 1.0;
  times.back() = 0.0;
  return TimeSchedule(std::move(times));
}

HistoryBuffer::HistoryBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidArgument("history capacity must be positive");
}

void HistoryBuffer::push(VelocityEvalRecord record) {
  if (record.v.size() != record.x.size()) {
    throw InvalidArgument("history record: v and x dimensions differ");
  }
  if (!records_.empty() && !(record.t < records_.back().t)) {
    throw InvalidArgument("history record time " + std::to_string(record.t) +
                          " is not below newest stored time " +
                          std::to_string(records_.back().t));
  }
  records_.push_back(std::move(record));
  if (records_.size() > capacity_) records_.pop_front();
}

VelocityEvalRecord HistoryBuffer::pop_newest() {
  if (records_.empty()) throw InvalidState("pop from empty history buffer");
  VelocityEvalRecord r = std::move(records_.back());
  records_.pop_back();
  return r;
}

const VelocityEvalRecord& HistoryBuffer::newest(std::size_t k) const {
  if (k >= records_.size()) throw InvalidState("history buffer has too few records");
  return records_[records_.size() - 1 - k];
}

}  // namespace flowsolve
