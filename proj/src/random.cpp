#include "flowsolve/random.hpp"

#include <cmath>
#include <numbers>

namespace flowsolve {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::key(std::uint64_t counter, std::uint64_t lane) const {
  return mix64(mix64(mix64(seed_) ^ stream_) ^ (counter * 2 + lane));
}

double CounterRng::uniform(std::uint64_t counter) const {
  // (k + 0.5) / 2^53 lies strictly inside (0, 1)
  const std::uint64_t k = key(counter, 0) >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = (static_cast<double>(key(counter, 0) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(key(counter, 1) >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector CounterRng::normal_vector(Eigen::Index dim, std::uint64_t offset) const {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(offset + static_cast<std::uint64_t>(i));
  return v;
}

}  // namespace flowsolve
