#include <cmath>
#include <random>

#include "doctest.h"

#include "flowsolve/metrics.hpp"
#include "flowsolve/random.hpp"

using namespace flowsolve;

TEST_CASE("endpoint errors") {
  const Vector a = Eigen::Vector2d(1.0, 2.0);
  const Vector b = Eigen::Vector2d(4.0, -2.0);
  CHECK(endpoint_error(a, b) == doctest::Approx(5.0));
  CHECK(endpoint_error(a, b, Norm::linf) == doctest::Approx(4.0));
  CHECK(endpoint_error(a, a) == 0.0);
  CHECK_THROWS_AS(endpoint_error(a, Vector::Zero(3)), InvalidArgument);

  const std::vector<State> approx{a, a};
  const std::vector<State> exact{b, a};
  CHECK(endpoint_rmse(approx, exact) == doctest::Approx(std::sqrt(12.5)));
  CHECK_THROWS_AS(endpoint_rmse(approx, {b}), InvalidArgument);
  CHECK_THROWS_AS(endpoint_rmse({}, {}), InvalidArgument);
}

TEST_CASE("fit_order") {
  SUBCASE("exact power law") {
    const std::vector<std::size_t> n{10, 20, 40, 80};
    std::vector<double> e;
    for (auto k : n) e.push_back(3.0 * std::pow(1.0 / static_cast<double>(k), 2.5));
    const auto r = fit_order(n, e);
    CHECK(r.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.excluded == 0);
  }
  SUBCASE("round-off points are excluded") {
    const std::vector<std::size_t> n{10, 20, 40, 80, 160};
    const std::vector<double> e{1e-2, 2.5e-3, 1e-14, 0.0, 1e-15};
    CHECK_THROWS_AS(fit_order(n, e), InvalidArgument);
    const std::vector<double> e2{1e-2, 2.5e-3, 6.25e-4, 1.5625e-4, 1e-16};
    const auto r = fit_order(n, e2);
    CHECK(r.excluded == 1);
    CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(fit_order({10, 20}, {1.0, 0.5}), InvalidArgument);
    CHECK_THROWS_AS(fit_order({10, 20, 20}, {1.0, 0.5, 0.2}), InvalidArgument);
    CHECK_THROWS_AS(fit_order({10, 20, 40}, {1.0, 0.5}), InvalidArgument);
  }
}

TEST_CASE("gaussian_w2 closed forms") {
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(gaussian_w2(Vector::Zero(2), id, Vector::Zero(2), id) == doctest::Approx(0.0));
  CHECK(gaussian_w2(Eigen::Vector2d(1.0, 2.0), id, Vector::Zero(2), id) ==
        doctest::Approx(5.0));
  // commuting diagonal covariances: sum (sqrt(a_i) - sqrt(b_i))^2
  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  a.diagonal() << 4.0, 9.0;
  b.diagonal() << 1.0, 1.0;
  CHECK(gaussian_w2(Vector::Zero(2), a, Vector::Zero(2), b) == doctest::Approx(1.0 + 4.0));
  // 1-D: (m1 - m2)^2 + (s1 - s2)^2
  Matrix s1(1, 1), s2(1, 1);
  s1(0, 0) = 0.25;
  s2(0, 0) = 2.25;
  CHECK(gaussian_w2(Vector::Constant(1, 3.0), s1, Vector::Constant(1, 1.0), s2) ==
        doctest::Approx(4.0 + 1.0));
  // singular covariance is handled by clamping
  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK(gaussian_w2(Vector::Zero(2), sing, Vector::Zero(2), id) == doctest::Approx(1.0));

  Matrix asym = id;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(gaussian_w2(Vector::Zero(2), asym, Vector::Zero(2), id), InvalidArgument);
}

TEST_CASE("psd_sqrt") {
  Matrix m(2, 2);
  m << 5.0, 2.0, 2.0, 2.0;
  const Matrix r = psd_sqrt(m);
  CHECK((r * r - m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sample_moments") {
  const std::vector<State> s{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-1.0, 0.0),
                             Eigen::Vector2d(0.0, 2.0), Eigen::Vector2d(0.0, -2.0)};
  const Moments m = sample_moments(s);
  CHECK(m.mean.norm() == 0.0);
  CHECK(m.cov(0, 0) == doctest::Approx(0.5));
  CHECK(m.cov(1, 1) == doctest::Approx(2.0));
  CHECK(m.cov(0, 1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(sample_moments({}), InvalidArgument);
}

TEST_CASE("energy_distance") {
  // two point masses at distance d: 2d - 0 - 0
  const std::vector<State> a{Vector::Constant(1, 0.0)};
  const std::vector<State> b{Vector::Constant(1, 3.0)};
  CHECK(energy_distance(a, b) == doctest::Approx(6.0));

  // brute-force oracle on small random sets
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  std::vector<State> x, y;
  for (int i = 0; i < 7; ++i) x.push_back(Eigen::Vector2d(n(gen), n(gen)));
  for (int i = 0; i < 5; ++i) y.push_back(Eigen::Vector2d(n(gen) + 1.0, n(gen)));
  double xy = 0, xx = 0, yy = 0;
  for (const auto& p : x) for (const auto& q : y) xy += (p - q).norm();
  for (const auto& p : x) for (const auto& q : x) xx += (p - q).norm();
  for (const auto& p : y) for (const auto& q : y) yy += (p - q).norm();
  const double oracle = 2 * xy / 35.0 - xx / 49.0 - yy / 25.0;
  CHECK(energy_distance(x, y) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(energy_distance(x, x) == doctest::Approx(0.0));
  CHECK(energy_distance(x, y) == doctest::Approx(energy_distance(y, x)).epsilon(1e-12));
}

TEST_CASE("CounterRng") {
  const CounterRng r(42, 0);
  CHECK(r.uniform(7) == CounterRng(42, 0).uniform(7));
  CHECK(r.uniform(7) != CounterRng(42, 1).uniform(7));
  CHECK(r.uniform(7) != CounterRng(43, 0).uniform(7));
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform(static_cast<std::uint64_t>(i));
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    const double z = r.normal(static_cast<std::uint64_t>(i));
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  const Vector v = r.normal_vector(3, 10);
  CHECK(v(1) == r.normal(11));
}
