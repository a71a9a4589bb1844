#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gauge.hpp"

using namespace fg;

namespace {

const double pi = std::numbers::pi;

// sec/tan Riccati example: A(t) and the gauge x = G y with G the inverse of the stated matrix.
TimeMatrix sec_tan_system() {
  return TimeMatrix::parse(2, {"-tan(t)", "2*sec(t)", "cos(t)", "0"}, {}, {-1.4, 1.4});
}
TimeMatrix sec_tan_gauge() { return TimeMatrix::parse(2, {"0", "2", "-cos(t)", "sin(t)"}, {}, {-1.4, 1.4}); }
const SquareMatrix sec_tan_B{{0, -1}, {-1, 0}};

TimeMatrix rational_system() {
  return TimeMatrix::parse(2, {"(2 - t^2)/(t*(t + 1))", "(2 - t - t^2)/(t^2*(t + 1))", "-(t + 1)", "0"}, {},
                           {0.1, 10.0});
}
TimeMatrix rational_gauge() { return TimeMatrix::parse(2, {"1/(1 + t)", "1", "-t", "-t"}, {}, {0.1, 10.0}); }
const SquareMatrix rational_B{{-1, 1}, {1, 0}};

// kappa0 = 1, kappa1 = 0, beta = 1.
TimeMatrix exponential_system() { return TimeMatrix::parse(2, {"0", "exp(-t)", "-exp(t)", "0"}); }
TimeMatrix exponential_gauge() { return TimeMatrix::parse(2, {"-exp(-t)", "-exp(-t)", "1", "0"}); }
const SquareMatrix exponential_B{{1, 1}, {-1, 0}};

// x' = x + cos(t) J x; rotation by beta(t) = sin t.
TimeMatrix rotating_radial() { return TimeMatrix::parse(2, {"1", "-cos(t)", "cos(t)", "1"}); }
TimeMatrix rotation_by(const std::string& beta, bool negate = false) {
  const std::string s = negate ? "-sin(" + beta + ")" : "sin(" + beta + ")";
  const std::string ms = negate ? "sin(" + beta + ")" : "-sin(" + beta + ")";
  return TimeMatrix::parse(2, {"cos(" + beta + ")", ms, s, "cos(" + beta + ")"});
}

NonlinearTerm radial() { return NonlinearTerm::parse({"(1 - x1^2 - x2^2)*x1", "(1 - x1^2 - x2^2)*x2"}, {}, true); }
NonlinearTerm product_term() { return NonlinearTerm::parse({"(1 - x1*x2)*x1", "(1 - x1*x2)*x2"}, {}, true); }

}  // namespace

TEST_CASE("push_linear examples") {
  const TimeMatrix a = rotating_radial();
  const TimeMatrix same = push_linear(a, GaugeTransform::identity(2));
  for (double t : {-1.0, 0.0, 2.5}) CHECK(max_norm(same.value(t) - a.value(t)) == 0.0);

  const GaugeTransform g8(sec_tan_gauge());
  const TimeMatrix b8 = push_linear(sec_tan_system(), g8);
  CHECK(constancy_deviation(b8, sec_tan_B, uniform_grid(-1.4, 1.4, 513)) < 1e-9);

  const GaugeTransform g9(rational_gauge());
  const TimeMatrix b9 = push_linear(rational_system(), g9);
  CHECK(constancy_deviation(b9, rational_B, uniform_grid(0.1, 10.0, 513)) < 1e-8);
}

TEST_CASE("transport residual examples") {
  const std::vector<double> grid7 = uniform_grid(0.0, 2.0, 50);
  CHECK(transport_residual(exponential_system(), GaugeTransform(exponential_gauge()), exponential_B, grid7) < 1e-12);
  const SquareMatrix c{{0.3, -1.0}, {2.0, 0.1}};
  CHECK(transport_residual(TimeMatrix::constant(c), GaugeTransform::identity(2), c, grid7) == 0.0);
  CHECK(transport_residual(sec_tan_system(), GaugeTransform(sec_tan_gauge()), sec_tan_B,
                           uniform_grid(-1.4, 1.4, 50)) < 1e-12);
  CHECK(transport_residual(rational_system(), GaugeTransform(rational_gauge()), rational_B,
                           uniform_grid(0.1, 10.0, 50)) < 1e-12);
}

TEST_CASE("near-singular gauges report the time") {
  try {
    GaugeTransform bad(TimeMatrix::parse(2, {"1", "0", "0", "t"}, {}, {-1.0, 1.0}), 201);
    FAIL("expected NearSingular");
  } catch (const NearSingularError& e) {
    CHECK(e.has_time());
    CHECK(std::abs(e.time()) < 1e-9);
  }
  // The sec/tan gauge is singular at pi/2.
  CHECK_THROWS_AS(GaugeTransform(TimeMatrix::parse(2, {"0", "2", "-cos(t)", "sin(t)"}, {}, {0.0, pi}), 101),
                  NearSingularError);
}

TEST_CASE("solve_transport examples") {
  const SquareMatrix c{{0.3, -1.0}, {2.0, 0.1}};
  const TransportSolution same = solve_transport(TimeMatrix::constant(c), c, SquareMatrix::identity(2), {0.0, 3.0});
  CHECK_FALSE(same.trimmed);
  for (double t : {0.0, 1.1, 3.0}) CHECK(max_norm(same.gauge.value(t) - SquareMatrix::identity(2)) < 1e-14);

  IntegratorOptions o;
  o.abs_tol = 1e-12;
  o.rel_tol = 1e-12;
  const SquareMatrix g0{{-1, -1}, {1, 0}};
  const TransportSolution ex = solve_transport(exponential_system(), exponential_B, g0, {0.0, 1.0}, o);
  const SquareMatrix expected{{-std::exp(-1.0), -std::exp(-1.0)}, {1, 0}};
  CHECK(max_norm(ex.gauge.value(1.0) - expected) < 1e-7);
  const TimeMatrix a_hat = push_linear(exponential_system(), ex.gauge);
  CHECK(constancy_deviation(a_hat, exponential_B, ex.gauge.matrix().trajectory().times()) < 1e-6);

  const SquareMatrix p0{{2, 1}, {-1, 3}};
  const TransportSolution still =
      solve_transport(TimeMatrix::constant(SquareMatrix(2)), SquareMatrix(2), p0, {0.0, 2.0});
  CHECK(still.gauge.value(1.7) == p0);

  // Backward solve keeps the anchor value.
  const TransportSolution back = solve_transport(exponential_system(), exponential_B, g0, {0.0, -1.0}, o);
  CHECK(back.domain[0] == -1.0);
  CHECK(back.gauge.value(0.0) == g0);
  CHECK(max_norm(back.gauge.value(-1.0) - SquareMatrix{{-std::exp(1.0), -std::exp(1.0)}, {1, 0}}) < 1e-7);
}

TEST_CASE("solve_transport trims a collapsing determinant") {
  const TimeMatrix a = TimeMatrix::constant(SquareMatrix::diagonal({0.0, -30.0}));
  const TransportSolution s = solve_transport(a, SquareMatrix(2), SquareMatrix::identity(2), {0.0, 1.0});
  CHECK(s.trimmed);
  CHECK_FALSE(s.warnings.empty());
  // exp(-30 t) < 1e-10 past t = ln(1e10)/30.
  CHECK(s.domain[1] < std::log(1e10) / 30);
  CHECK(s.domain[1] > std::log(1e10) / 30 - 0.05);
}

TEST_CASE("property: transport residual and Abel identity along solve_transport") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const ParamMap params{{"a", u(rng)}, {"b", u(rng)}, {"c", u(rng)}, {"d", u(rng)}};
    const TimeMatrix a = TimeMatrix::parse(2, {"a*sin(t)", "1 + b", "c - 1", "d*cos(2*t)"}, params);
    const SquareMatrix b{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const SquareMatrix p0 = SquareMatrix::identity(2) + SquareMatrix{{u(rng), u(rng)}, {u(rng), u(rng)}} * 0.3;
    IntegratorOptions o;
    const std::vector<double> grid = uniform_grid(0.0, 3.0, 61);
    o.stops.assign(grid.begin() + 1, grid.end() - 1);
    const TransportSolution s = solve_transport(a, b, p0, {0.0, 3.0}, o);
    REQUIRE_FALSE(s.trimmed);
    CHECK(transport_residual(a, s.gauge, b, grid) <= 10 * o.abs_tol);
    const double det = determinant(s.gauge.value(3.0));
    const double predicted = predicted_determinant(a, b, p0, {0.0, 3.0}, o);
    CHECK(std::abs(det - predicted) <= 1e-6 * std::abs(predicted));
  }
}

TEST_CASE("property: composition and inverse of gauges") {
  const TimeMatrix a = rational_system();
  const GaugeTransform p1(TimeMatrix::parse(2, {"2 + sin(t)", "cos(t)", "0.5", "1 + t/10"}, {}, {0.1, 10.0}));
  const GaugeTransform p2(TimeMatrix::parse(2, {"1", "t/5", "-sin(t)/3", "2"}, {}, {0.1, 10.0}));
  const std::vector<double> grid = uniform_grid(0.2, 9.9, 97);

  const TimeMatrix step = push_linear(push_linear(a, p1), p2);
  const TimeMatrix direct = push_linear(a, GaugeTransform(multiply(p1.matrix(), p2.matrix())));
  double worst = 0.0;
  for (double t : grid) worst = std::max(worst, max_norm(step.value(t) - direct.value(t)));
  CHECK(worst <= 2e-8);

  const TimeMatrix round = push_linear(push_linear(a, p1), GaugeTransform(pointwise_inverse(p1.matrix())));
  worst = 0.0;
  for (double t : grid) worst = std::max(worst, max_norm(round.value(t) - a.value(t)));
  CHECK(worst <= 2e-8);
}

TEST_CASE("push_nonlinear examples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(-5.0, 5.0), uy(-1.5, 1.5);

  const NonlinearTerm n = product_term();
  const NonlinearTerm same = push_nonlinear(n, GaugeTransform::identity(2));
  for (int k = 0; k < 20; ++k) {
    const double t = ut(rng);
    const std::vector<double> y{uy(rng), uy(rng)};
    CHECK(same(t, y) == n(t, y));
  }

  const NonlinearTerm f = push_nonlinear(radial(), GaugeTransform(rotation_by("sin(t)")));
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = ut(rng);
    const std::vector<double> y{uy(rng), uy(rng)};
    const auto fy = f(t, y);
    const auto ny = radial()(t, y);
    worst = std::max({worst, std::abs(fy[0] - ny[0]), std::abs(fy[1] - ny[1])});
  }
  CHECK(worst < 1e-10);

  // (1 - xi eta)(xi, eta) under rotation by +beta: the bracket becomes
  // 1 + sin(2 beta)(y^2 - x^2)/2 - cos(2 beta) x y.
  const NonlinearTerm g = push_nonlinear(n, GaugeTransform(rotation_by("sin(t)")));
  worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = ut(rng);
    const double beta = std::sin(t);
    const double x = uy(rng), y = uy(rng);
    const double bracket = 1 + 0.5 * std::sin(2 * beta) * (y * y - x * x) - std::cos(2 * beta) * x * y;
    const auto gy = g(t, std::vector<double>{x, y});
    worst = std::max({worst, std::abs(gy[0] - bracket * x), std::abs(gy[1] - bracket * y)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("equivariance examples") {
  const std::vector<SquareMatrix> rotations = random_rotations(2, 20, 99);
  for (const auto& r : rotations) {
    CHECK(max_norm(r.transpose() * r - SquareMatrix::identity(2)) < 1e-13);
    CHECK(determinant(r) == doctest::Approx(1.0));
  }
  const Report ok = equivariance_check(radial(), rotations, 1e-10);
  CHECK(ok.passed());
  const Report bad = equivariance_check(product_term(), rotations, 1e-10);
  CHECK_FALSE(bad.passed());
  CHECK(bad.checks[0].value > 0.1);
  const Report linear = equivariance_check(NonlinearTerm::parse({"x1", "x2"}), rotations, 1e-12);
  CHECK(linear.passed());
  const Report ortho = equivariance_check(NonlinearTerm::parse({"x1", "x2", "x3"}), random_rotations(3, 5, 1), 1e-12);
  CHECK(ortho.passed());
}

TEST_CASE("property: in-group gauge leaves an equivariant term autonomous") {
  const NonlinearTerm f = push_nonlinear(radial(), GaugeTransform(rotation_by("sin(3*t) + t")));
  const std::vector<double> y{0.7, -0.4};
  const auto ref = f(0.0, y);
  for (int k = 1; k <= 20; ++k) {
    const auto v = f(0.37 * k, y);
    CHECK(std::abs(v[0] - ref[0]) < 1e-8);
    CHECK(std::abs(v[1] - ref[1]) < 1e-8);
  }
}

TEST_CASE("nonlinear term validation") {
  CHECK_THROWS_AS(NonlinearTerm::parse({"x1*t", "x2"}, {}, true), Error);
  CHECK_THROWS_AS(NonlinearTerm::parse({"x3", "x1"}), Error);
  CHECK_THROWS_AS(NonlinearTerm::parse({"k*x1", "x2"}), Error);
  CHECK_NOTHROW(NonlinearTerm::parse({"k*x1", "x2"}, {{"k", 2.0}}));
  CHECK_THROWS_AS(radial()(0.0, std::vector<double>{1.0}), Error);
}

TEST_CASE("covariant derivative examples") {
  const SquareMatrix c{{0.1, -1.0}, {1.0, -0.2}};
  const IntegratorOptions defaults;
  const Trajectory x = integrate_vector(
      [&c](double, std::span<const double> s, std::span<double> d) {
        d[0] = c(0, 0) * s[0] + c(0, 1) * s[1];
        d[1] = c(1, 0) * s[0] + c(1, 1) * s[1];
      },
      {1.0, 0.5}, {0.0, 5.0}, defaults);
  const double tol = std::max(defaults.abs_tol, defaults.rel_tol);
  CHECK(covariant_derivative_residual(x, GaugeTransform::identity(2), c, uniform_grid(0.5, 4.5, 41)) <= 10 * tol);

  const TimeMatrix a = rotating_radial();
  IntegratorOptions o;
  o.abs_tol = o.rel_tol = 1e-12;
  const Trajectory xr = integrate_vector(
      [&a](double t, std::span<const double> s, std::span<double> d) {
        const SquareMatrix m = a.value(t);
        d[0] = m(0, 0) * s[0] + m(0, 1) * s[1];
        d[1] = m(1, 0) * s[0] + m(1, 1) * s[1];
      },
      {1.0, 0.0}, {0.0, 2 * pi}, o);
  const double r =
      covariant_derivative_residual(xr, GaugeTransform(rotation_by("sin(t)")), SquareMatrix::identity(2),
                                    uniform_grid(0.1, 2 * pi - 0.1, 50));
  CHECK(r <= 1e-5);
}
