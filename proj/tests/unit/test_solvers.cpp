#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "doctest.h"

#include "flowsolve/fields.hpp"
#include "flowsolve/metrics.hpp"
#include "flowsolve/solvers.hpp"

using namespace flowsolve;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// Counts evaluations independently of CountedField.
class TallyField final : public VelocityField {
 public:
  explicit TallyField(const VelocityField& inner) : inner_(inner) {}
  std::size_t dim() const override { return inner_.dim(); }
  Vector evaluate(const Vector& x, double t) const override {
    ++calls;
    return inner_.evaluate(x, t);
  }
  mutable std::atomic<std::size_t> calls{0};

 private:
  const VelocityField& inner_;
};

class NanAfter final : public VelocityField {
 public:
  explicit NanAfter(double t_bad) : t_bad_(t_bad) {}
  std::size_t dim() const override { return 1; }
  Vector evaluate(const Vector& x, double t) const override {
    return t <= t_bad_ ? scalar(std::numeric_limits<double>::quiet_NaN()) : x;
  }

 private:
  double t_bad_;
};

bool bit_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

SolverConfig make_config(Method m, const TimeSchedule& s, int order = 1, bool pc = false) {
  SolverConfig c;
  c.method = m;
  c.order = order;
  c.use_corrector = pc;
  c.schedule = s;
  return c;
}

AffineField test_affine() {
  Matrix a(2, 2);
  a << -0.5, 1.0, -1.0, -0.5;
  return AffineField(a, Vector::Map(std::vector<double>{0.3, -0.2}.data(), 2));
}

}  // namespace

TEST_CASE("step_euler") {
  const PolyTimeField constant({2.0}, 1);
  CountedField f(constant);
  CHECK(step_euler(f, scalar(0.0), 1.0, 0.5)(0) == -1.0);

  const PolyTimeField zero({0.0}, 1);
  CountedField z(zero);
  CHECK(step_euler(z, scalar(3.5), 1.0, 0.5)(0) == 3.5);

  const PolyTimeField linear({0.0, 1.0}, 1);
  CountedField l(linear);
  CHECK(step_euler(l, scalar(0.0), 1.0, 0.5)(0) == -0.5);
  CHECK(l.nfe_count() == 1);
  CHECK_THROWS_AS(step_euler(l, scalar(0.0), 0.5, 1.0), InvalidArgument);
}

TEST_CASE("step_heun") {
  const PolyTimeField constant({2.0}, 1);
  CountedField f(constant);
  CHECK(step_heun(f, scalar(0.0), 1.0, 0.5)(0) == -1.0);
  CHECK(f.nfe_count() == 2);

  // trapezoid is exact for velocities linear in t: integral_1^0.5 t dt = -0.375
  const PolyTimeField linear({0.0, 1.0}, 1);
  CountedField l(linear);
  CHECK(step_heun(l, scalar(0.0), 1.0, 0.5)(0) == doctest::Approx(-0.375).epsilon(1e-15));

  const PolyTimeField zero({0.0}, 1);
  CountedField z(zero);
  CHECK(step_heun(z, scalar(1.25), 1.0, 0.5)(0) == 1.25);
}

TEST_CASE("step_rk3") {
  const PolyTimeField constant({2.0}, 1);
  CountedField f(constant);
  CHECK(step_rk3(f, scalar(0.0), 1.0, 0.5)(0) == -1.0);
  CHECK(f.nfe_count() == 3);

  const PolyTimeField quad({0.0, 0.0, 1.0}, 1);
  CountedField q(quad);
  CHECK(step_rk3(q, scalar(0.0), 1.0, 0.0)(0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

  const PolyTimeField zero({0.0}, 1);
  CountedField z(zero);
  CHECK(step_rk3(z, scalar(-2.0), 1.0, 0.5)(0) == -2.0);
}

TEST_CASE("step_flow_predict") {
  SUBCASE("no history is Euler, bit for bit") {
    const AffineField field = test_affine();
    CountedField counted(field);
    const Vector x = Vector::Map(std::vector<double>{0.3, -1.7}.data(), 2);
    const Vector v = field.evaluate(x, 0.8);
    const HistoryBuffer empty(3);
    CHECK(bit_equal(step_flow_predict(x, v, 0.8, 0.55, empty, 3),
                    step_euler(counted, x, 0.8, 0.55)));
    HistoryBuffer full(3);
    full.push({0.9, v, x});
    CHECK(bit_equal(step_flow_predict(x, v, 0.8, 0.55, full, 1),
                    step_euler(counted, x, 0.8, 0.55)));
  }
  SUBCASE("AB2 is exact for v = t") {
    const PolyTimeField linear({0.0, 1.0}, 1);
    HistoryBuffer buf(2);
    buf.push({0.75, scalar(0.75), scalar(0.0)});
    const State x = step_flow_predict(scalar(0.0), scalar(0.5), 0.5, 0.25, buf, 2);
    const double exact = (0.25 * 0.25 - 0.5 * 0.5) / 2.0;
    CHECK(std::abs(x(0) - exact) <= 1e-15);
  }
  SUBCASE("constant field reduces to Euler") {
    HistoryBuffer buf(3);
    buf.push({0.9, scalar(4.0), scalar(0.0)});
    buf.push({0.8, scalar(4.0), scalar(0.0)});
    const State x = step_flow_predict(scalar(1.0), scalar(4.0), 0.7, 0.6, buf, 3);
    CHECK(x(0) == doctest::Approx(1.0 + (0.6 - 0.7) * 4.0).epsilon(1e-15));
  }
  SUBCASE("records coefficients") {
    HistoryBuffer buf(3);
    buf.push({0.9, scalar(1.0), scalar(0.0)});
    buf.push({0.8, scalar(1.0), scalar(0.0)});
    StepCoefficients sc;
    step_flow_predict(scalar(0.0), scalar(1.0), 0.7, 0.6, buf, 3, &sc);
    REQUIRE(sc.order() == 2);
    CHECK(sc.deltas[0] == doctest::Approx(0.1));
    CHECK(sc.deltas[1] == doctest::Approx(0.2));
    CHECK(sc.h == doctest::Approx(-0.1));
  }
}

TEST_CASE("step_flow_correct") {
  SUBCASE("constant field leaves the prediction unchanged") {
    HistoryBuffer buf(2);
    buf.push({0.75, scalar(3.0), scalar(0.0)});
    const State predicted = scalar(0.0 + (0.5 - 0.75) * 3.0);
    const State corrected = step_flow_correct(scalar(0.0), scalar(3.0), 0.75, 0.5, buf, 2);
    CHECK(corrected(0) == doctest::Approx(predicted(0)).epsilon(1e-15));
    CHECK(buf.size() == 1);
  }
  SUBCASE("order 2 corrector integrates t^2 exactly") {
    auto v = [](double t) { return scalar(t * t); };
    HistoryBuffer buf(2);
    buf.push({0.75, v(0.75), scalar(0.0)});
    buf.push({0.5, v(0.5), scalar(0.0)});
    // predictor alone (AB2) is not exact on t^2
    HistoryBuffer pred_view(2);
    pred_view.push({0.75, v(0.75), scalar(0.0)});
    const double exact = (std::pow(0.25, 3) - std::pow(0.5, 3)) / 3.0;
    const State predicted = step_flow_predict(scalar(0.0), v(0.5), 0.5, 0.25, pred_view, 2);
    CHECK(std::abs(predicted(0) - exact) > 1e-4);
    const State corrected = step_flow_correct(scalar(0.0), v(0.25), 0.5, 0.25, buf, 2);
    CHECK(std::abs(corrected(0) - exact) <= 1e-15);
    CHECK(buf.size() == 2);
    CHECK(buf.newest().t == 0.5);
  }
  SUBCASE("order 1 corrector matches Heun on the first interval") {
    const AffineField field = test_affine();
    const Vector x0 = Vector::Map(std::vector<double>{1.0, -0.5}.data(), 2);
    CountedField counted(field);
    const Vector v0 = field.evaluate(x0, 1.0);
    HistoryBuffer empty(1);
    const State pred = step_flow_predict(x0, v0, 1.0, 0.8, empty, 1);
    HistoryBuffer buf(1);
    buf.push({1.0, v0, x0});
    const State corrected =
        step_flow_correct(x0, field.evaluate(pred, 0.8), 1.0, 0.8, buf, 1);
    const State heun = step_heun(counted, x0, 1.0, 0.8);
    CHECK((corrected - heun).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("empty buffer") {
    const HistoryBuffer empty(2);
    CHECK_THROWS_AS(step_flow_correct(scalar(0.0), scalar(1.0), 0.5, 0.25, empty, 2),
                    InvalidState);
  }
}

TEST_CASE("flow order 1 is bit-identical to Euler") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> steps(1, 25);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix a = Matrix::NullaryExpr(3, 3, [&] { return u(gen); });
    Vector b = Vector::NullaryExpr(3, [&] { return u(gen); });
    const AffineField field(a, b);
    const TimeSchedule sched = trial % 2 ? make_uniform_schedule(steps(gen))
                                         : make_shifted_schedule(steps(gen), 0.5 + 3.0 * (u(gen) + 1.0));
    const Vector x = Vector::NullaryExpr(3, [&] { return u(gen); });
    const auto flow = sample(make_config(Method::flow, sched, 1, false), field, x);
    const auto euler = sample(make_config(Method::euler, sched), field, x);
    REQUIRE(flow.states.size() == euler.states.size());
    for (std::size_t i = 0; i < flow.states.size(); ++i) {
      CHECK(bit_equal(flow.states[i], euler.states[i]));
    }
  }
}

TEST_CASE("NFE law") {
  const AffineField field = test_affine();
  const TallyField tally(field);
  const Vector x = Vector::Ones(2);
  const auto sched = make_uniform_schedule(10);
  struct Case {
    Method m;
    int order;
    bool pc;
    std::size_t nfe;
  };
  for (const Case& c : {Case{Method::euler, 1, false, 10}, Case{Method::heun, 1, false, 20},
                        Case{Method::rk3, 1, false, 30}, Case{Method::flow, 1, false, 10},
                        Case{Method::flow, 3, false, 10}, Case{Method::flow, 2, true, 10},
                        Case{Method::flow, 4, true, 10}}) {
    tally.calls = 0;
    const auto r = sample(make_config(c.m, sched, c.order, c.pc), tally, x);
    CHECK(r.nfe == c.nfe);
    CHECK(tally.calls == c.nfe);
    CHECK(r.states.size() == sched.size());
  }
}

TEST_CASE("warm-up on v = t^2 against a classical-formula oracle") {
  // Four uniform steps, h = -1/4.  With warm-up correction the sequence is:
  // Euler predict; trapezoid correct + AB2 predict; AM3 correct + AB3
  // predict; AB3 predict.  AM3/AB3 are exact on t^2, so only the trapezoid
  // error on [1, 0.75] survives.
  auto v = [](double t) { return t * t; };
  const double h = -0.25;
  const double exact = -1.0 / 3.0;
  const PolyTimeField field({0.0, 0.0, 1.0}, 1);
  const auto sched = make_uniform_schedule(4);

  const double x1 = 0.0 + h / 2 * (v(1.0) + v(0.75));
  const double x2 = x1 + h * (5.0 / 12 * v(0.5) + 8.0 / 12 * v(0.75) - 1.0 / 12 * v(1.0));
  const double x3 = x2 + h * (23.0 / 12 * v(0.5) - 16.0 / 12 * v(0.75) + 5.0 / 12 * v(1.0));
  const double x4 = x3 + h * (23.0 / 12 * v(0.25) - 16.0 / 12 * v(0.5) + 5.0 / 12 * v(0.75));

  auto cfg = make_config(Method::flow, sched, 3, false);
  const auto r = sample(cfg, field, scalar(0.0));
  CHECK(std::abs(r.states[4](0) - x4) <= 1e-14);
  const double trapezoid_error = h / 2 * (v(1.0) + v(0.75)) - (std::pow(0.75, 3) - 1.0) / 3.0;
  CHECK(std::abs((r.states[4](0) - exact) - trapezoid_error) <= 1e-14);

  // plain ramp: Euler, AB2, AB3, AB3
  cfg.warmup_correction = false;
  const double y1 = h * v(1.0);
  const double y2 = y1 + h * (1.5 * v(0.75) - 0.5 * v(1.0));
  const double y3 = y2 + h * (23.0 / 12 * v(0.5) - 16.0 / 12 * v(0.75) + 5.0 / 12 * v(1.0));
  const double y4 = y3 + h * (23.0 / 12 * v(0.25) - 16.0 / 12 * v(0.5) + 5.0 / 12 * v(0.75));
  const auto plain = sample(cfg, field, scalar(0.0));
  CHECK(std::abs(plain.states[4](0) - y4) <= 1e-14);
}

TEST_CASE("warmed start is exact on polynomials") {
  // history seeded from the uniform grid above t = 1 - k h
  const PolyTimeField quad({0.0, 0.0, 1.0}, 1);
  const std::vector<double> times{0.75, 0.625, 0.5, 0.375, 0.25, 0.125, 0.0};
  HistoryBuffer warm(2);
  for (double t : {1.0, 0.875}) warm.push({t, quad.evaluate(scalar(0.0), t), scalar(0.0)});
  SolverConfig cfg = make_config(Method::flow, TimeSchedule(times, true), 3, false);
  const State x0 = quad.exact_endpoint(scalar(0.0), 1.0, 0.75);
  const auto r = sample(cfg, quad, x0, &warm);
  CHECK(std::abs(r.states.back()(0) + 1.0 / 3.0) <= 1e-12);
  CHECK(r.nfe == times.size() - 1);
}

TEST_CASE("step errors carry the step index") {
  const NanAfter field(0.45);
  for (Method m : {Method::euler, Method::heun, Method::rk3, Method::flow}) {
    try {
      sample(make_config(m, make_uniform_schedule(10), 2, true), field, scalar(1.0));
      FAIL("expected StepError");
    } catch (const StepError& e) {
      CHECK(e.step() >= 1);
      CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(sample(make_config(Method::euler, make_uniform_schedule(2)), field,
                         Vector::Ones(2)),
                  InvalidArgument);
}

TEST_CASE("determinism") {
  const GaussianMixtureFlowField gm({0.5, 0.5}, {Vector::Constant(2, 1.0), Vector::Constant(2, -1.0)},
                                    0.3);
  const Vector x = Vector::Map(std::vector<double>{0.2, -0.9}.data(), 2);
  const auto cfg = make_config(Method::flow, make_shifted_schedule(9, 3.0), 3, true);
  const auto a = sample(cfg, gm, x);
  const auto b = sample(cfg, gm, x);
  for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(bit_equal(a.states[i], b.states[i]));
}

TEST_CASE("plain warm-up ramp caps s = 3 at second order") {
  const AffineField field = test_affine();
  const Vector x = Vector::Map(std::vector<double>{0.7, -0.4}.data(), 2);
  const State exact = field.exact_endpoint(x, 1.0, 0.0);
  auto slope = [&](bool warmup) {
    std::vector<std::size_t> ns{20, 40, 80, 160};
    std::vector<double> errs;
    for (std::size_t n : ns) {
      auto cfg = make_config(Method::flow, make_uniform_schedule(n), 3, false);
      cfg.warmup_correction = warmup;
      errs.push_back(endpoint_error(sample(cfg, field, x).states.back(), exact));
    }
    return fit_order(ns, errs).slope;
  };
  CHECK(slope(false) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(slope(true) == doctest::Approx(3.0).epsilon(0.1));
}
