#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "floquet.hpp"

using namespace fg;

namespace {

const double pi = std::numbers::pi;
const SquareMatrix J{{0, -1}, {1, 0}};

// x' = x + w(t) J x with w = cos t. Phi(t) = e^t exp(sin(t) J).
TimeMatrix rotating_radial() { return TimeMatrix::parse(2, {"1", "-cos(t)", "cos(t)", "1"}); }

// Phi(T) = diag(-1, -2): P(t) = rotation by pi t / T, B = diag(0, ln 2 / T).
TimeMatrix half_turn_system(double period) {
  const ParamMap params{{"T", period}, {"c", std::log(2.0) / period}};
  return TimeMatrix::parse(2,
                           {"c*sin(pi*t/T)^2", "-pi/T - c*sin(pi*t/T)*cos(pi*t/T)",
                            "pi/T - c*sin(pi*t/T)*cos(pi*t/T)", "c*cos(pi*t/T)^2"},
                           params);
}

}  // namespace

TEST_CASE("fundamental matrix examples") {
  const Trajectory rot = fundamental_matrix(TimeMatrix::constant(J), 3.0);
  CHECK(rot.eval_matrix(0.0) == SquareMatrix::identity(2));
  for (double t : {0.5, 1.5, 3.0}) CHECK(max_norm(rot.eval_matrix(t) - expm(J * t)) < 1e-8);

  const TimeMatrix a = rotating_radial();
  const Trajectory phi = fundamental_matrix(a, 2 * pi);
  CHECK(liouville_residual(phi, a) <= 1e-6);
  for (double t : {1.0, 4.0}) CHECK(std::abs(determinant(phi.eval_matrix(t)) / std::exp(2 * t) - 1) < 1e-6);

  const Trajectory zero = fundamental_matrix(TimeMatrix::constant(SquareMatrix(3)), 2.0);
  CHECK(zero.eval_matrix(1.3) == SquareMatrix::identity(3));
  CHECK_THROWS_AS(fundamental_matrix(a, -1.0), Error);
}

TEST_CASE("monodromy examples") {
  CHECK(max_norm(monodromy(TimeMatrix::constant(J), 2 * pi) - SquareMatrix::identity(2)) < 1e-10);
  const SquareMatrix m = monodromy(rotating_radial(), 2 * pi);
  const double e2pi = std::exp(2 * pi);
  CHECK(max_norm(m - SquareMatrix::identity(2) * e2pi) / e2pi < 1e-6);
  const SquareMatrix d = monodromy(TimeMatrix::constant(SquareMatrix::diagonal({0.4, -1.1})), 1.0);
  CHECK(d(0, 0) == doctest::Approx(std::exp(0.4)).epsilon(1e-10));
  CHECK(d(1, 1) == doctest::Approx(std::exp(-1.1)).epsilon(1e-10));
  CHECK(std::abs(d(0, 1)) < 1e-14);
}

TEST_CASE("decomposition of a constant system") {
  const SquareMatrix a{{0.2, 1.0}, {-0.7, -0.3}};
  const FloquetDecomposition dec = floquet_decompose(TimeMatrix::constant(a), 1.5);
  CHECK_FALSE(dec.doubled);
  CHECK(max_norm(dec.B - a) < 1e-10);
  for (double t : {0.0, 0.4, 1.5}) CHECK(max_norm(dec.P.value(t) - SquareMatrix::identity(2)) < 1e-10);
  const Report r = verify_decomposition(dec, TimeMatrix::constant(a), 1e-12);
  CHECK(r.passed());
  for (const Check& c : r.checks) {
    CAPTURE(c.name);
    CHECK(c.value < 1e-12);
  }
}

TEST_CASE("decomposition of the rotating radial system") {
  const TimeMatrix a = rotating_radial();
  const FloquetDecomposition dec = floquet_decompose(a, 2 * pi);
  CHECK_FALSE(dec.doubled);
  CHECK(max_norm(dec.B - SquareMatrix::identity(2)) <= 1e-6);
  CHECK(dec.P.value(0.0) == SquareMatrix::identity(2));
  for (int k = 0; k <= 20; ++k) {
    const double t = 2 * pi * k / 20;
    CHECK(max_norm(dec.P.value(t) - expm(J * std::sin(t))) < 1e-6);
  }
  REQUIRE(dec.multipliers.eigenvalues.size() == 2);
  for (auto mu : dec.multipliers.eigenvalues) CHECK(std::abs(mu - std::exp(2 * pi)) / std::exp(2 * pi) < 1e-6);

  const Report r = verify_decomposition(dec, a, 1e-6);
  CHECK(r.passed());
  CHECK(r.find("phi_reconstruction")->value <= 1e-6);
  CHECK(r.find("p_periodicity")->value <= 1e-6);
  CHECK(r.find("gauge_constancy")->value <= 1e-5);
  CHECK(r.find("holonomy")->value <= 1e-6);
  CHECK(r.find("p_initial_identity")->value == 0.0);
}

TEST_CASE("scalar system x' = cos(t) x") {
  const TimeMatrix a = TimeMatrix::parse(1, {"cos(t)"});
  const FloquetDecomposition dec = floquet_decompose(a, 2 * pi);
  CHECK(std::abs(dec.B(0, 0)) < 1e-9);
  for (double t : {0.3, 1.0, 2.5, 5.0}) CHECK(std::abs(dec.P.value(t)(0, 0) - std::exp(std::sin(t))) < 1e-8);
  CHECK(verify_decomposition(dec, a, 1e-6).passed());
}

TEST_CASE("corrupted B is detected") {
  const TimeMatrix a = rotating_radial();
  FloquetDecomposition dec = floquet_decompose(a, 2 * pi);
  dec.B += SquareMatrix::identity(2) * 0.1;
  const Report r = verify_decomposition(dec, a, 1e-6);
  CHECK_FALSE(r.passed());
  CHECK(r.find("gauge_constancy")->value >= 0.09);
}

TEST_CASE("period doubling") {
  const double period = 1.0;
  const TimeMatrix a = half_turn_system(period);
  const SquareMatrix m = monodromy(a, period);
  CHECK(max_norm(m - SquareMatrix::diagonal({-1.0, -2.0})) < 1e-9);

  const FloquetDecomposition dec = floquet_decompose(a, period);
  CHECK(dec.doubled);
  CHECK(dec.effective_period() == 2.0);
  CHECK(max_norm(dec.B - SquareMatrix::diagonal({0.0, std::log(2.0)})) < 1e-8);
  for (double t : {0.25, 0.5, 1.5}) CHECK(max_norm(dec.P.value(t) - expm(J * (pi * t))) < 1e-7);
  const Report r = verify_decomposition(dec, a, 1e-6);
  CHECK(r.passed());
  CHECK_FALSE(r.warnings.empty());
  CHECK(r.data["doubled"].get<bool>());
  // The multipliers stay those of Phi(T).
  CHECK(dec.multipliers.eigenvalues[0].real() == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(dec.multipliers.eigenvalues[1].real() == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("half rotation has a real logarithm") {
  const FloquetDecomposition dec = floquet_decompose(TimeMatrix::constant(J), pi);
  CHECK_FALSE(dec.doubled);
  CHECK(max_norm(expm(dec.B * pi) + SquareMatrix::identity(2)) < 1e-9);
  CHECK(verify_decomposition(dec, TimeMatrix::constant(J), 1e-6).passed());
}

TEST_CASE("input validation") {
  const TimeMatrix drift = TimeMatrix::parse(1, {"t"});
  try {
    floquet_decompose(drift, 1.0);
    FAIL("expected Aperiodic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Aperiodic);
  }
  CHECK_THROWS_AS(floquet_decompose(rotating_radial(), 0.0), Error);
  CHECK_NOTHROW(check_periodic(rotating_radial(), 2 * pi, 20, 1e-8));
}

TEST_CASE("report serialisation") {
  const FloquetDecomposition dec = floquet_decompose(TimeMatrix::parse(1, {"cos(t)"}), 2 * pi);
  const Json j = verify_decomposition(dec, TimeMatrix::parse(1, {"cos(t)"}), 1e-6).to_json();
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["passed"].get<bool>());
  CHECK(j["checks"].size() == 5);
  CHECK(j["checks"][0].contains("grid"));
}
