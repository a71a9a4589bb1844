#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "linalg.hpp"

using namespace fg;

namespace {

const SquareMatrix Y1{{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
const SquareMatrix Y2{{0, 0, 0, 1}, {0, 0, 1, 0}, {0, -1, 0, 0}, {-1, 0, 0, 0}};
const SquareMatrix Y3{{0, 0, 1, 0}, {0, 0, 0, -1}, {-1, 0, 0, 0}, {0, 1, 0, 0}};
const SquareMatrix J{{0, -1}, {1, 0}};

SquareMatrix random_matrix(std::mt19937_64& rng, std::size_t n, double norm_bound) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SquareMatrix m(n);
  for (std::size_t k = 0; k < n * n; ++k) m.data()[k] = u(rng);
  const double scale = std::uniform_real_distribution<double>(0.0, norm_bound)(rng) / std::max(1e-12, norm1(m));
  return m * scale;
}

SquareMatrix rotation(double theta) { return {{std::cos(theta), -std::sin(theta)}, {std::sin(theta), std::cos(theta)}}; }

// Random matrix whose eigenvalues have imaginary parts inside (-pi+0.1, pi-0.1):
// a similarity transform of a block diagonal of 2x2 rotation-scaling blocks and
// real entries.
SquareMatrix random_log_safe(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> re(-1.5, 1.5);
  std::uniform_real_distribution<double> im(-(std::numbers::pi - 0.1), std::numbers::pi - 0.1);
  SquareMatrix d(n);
  std::size_t i = 0;
  while (i < n) {
    if (i + 1 < n && std::uniform_int_distribution<int>(0, 1)(rng)) {
      const double a = re(rng), b = im(rng);
      d(i, i) = a;
      d(i + 1, i + 1) = a;
      d(i, i + 1) = -b;
      d(i + 1, i) = b;
      i += 2;
    } else {
      d(i, i) = re(rng);
      i += 1;
    }
  }
  SquareMatrix s = SquareMatrix::identity(n);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (std::size_t k = 0; k < n * n; ++k) s.data()[k] += u(rng);
  return s * d * inverse(s);
}

}  // namespace

TEST_CASE("SU(2) generator relations hold exactly") {
  const SquareMatrix I4 = SquareMatrix::identity(4);
  CHECK(Y1 * Y1 == -I4);
  CHECK(Y2 * Y2 == -I4);
  CHECK(Y3 * Y3 == -I4);
  CHECK(Y1 * Y2 == Y3);
  CHECK(Y2 * Y3 == Y1);
  CHECK(Y3 * Y1 == Y2);
  CHECK(commutator(Y1, Y2) == 2.0 * Y3);
  CHECK(commutator(Y2, Y3) == 2.0 * Y1);
  CHECK(commutator(Y3, Y1) == 2.0 * Y2);
  const SquareMatrix A{{1, 2}, {3, 4}};
  CHECK(SquareMatrix::identity(2) * A == A);
}

TEST_CASE("dimension mismatch is reported") {
  CHECK_THROWS_AS(mul(SquareMatrix::identity(2), SquareMatrix::identity(3)), Error);
  CHECK_THROWS_AS(SquareMatrix(2, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("inverse and determinant") {
  // Gauge of the sec/tan Riccati example at t = 0: [[tan/2, -sec], [1/2, 0]].
  const SquareMatrix p8{{0.0, -1.0}, {0.5, 0.0}};
  const InverseResult r = inverse_with_det(p8);
  CHECK(r.det == doctest::Approx(0.5));
  CHECK(max_norm(p8 * r.inverse - SquareMatrix::identity(2)) <= 2e-10);
  CHECK(inverse(SquareMatrix::identity(3)) == SquareMatrix::identity(3));
  // Rational example at t = 1: det = (1 + t)/t^2 = 2.
  const double t = 1.0;
  const SquareMatrix p9{{-(t + 1) / t, -(t + 1) / (t * t)}, {1 + 1 / t, 1 / (t * t)}};
  CHECK(determinant(p9) == doctest::Approx(2.0).epsilon(1e-15));
  try {
    inverse(SquareMatrix{{1, 2}, {2, 4}});
    FAIL("expected NearSingular");
  } catch (const NearSingularError& e) {
    CHECK(e.code() == ErrorCode::NearSingular);
    CHECK(std::abs(e.determinant()) < 1e-12);
  }
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + i % 6;
    const SquareMatrix a = random_matrix(rng, n, 5.0) + SquareMatrix::identity(n) * 3.0;
    CHECK(max_norm(a * inverse(a) - SquareMatrix::identity(n)) <= 1e-10 * n);
  }
}

TEST_CASE("expm examples") {
  CHECK(expm(SquareMatrix(3)) == SquareMatrix::identity(3));
  const SquareMatrix r = expm(J * (std::numbers::pi / 2));
  CHECK(max_norm(r - J) < 1e-15);
  // exp(w A t) = cos(wt) I + sin(wt) A for A = sum a_i Y_i with unit coefficients.
  const double a1 = 0.36, a2 = 0.48, a3 = 0.8;
  const SquareMatrix A = Y1 * a1 + Y2 * a2 + Y3 * a3;
  for (double wt : {0.3, 1.7, 4.0, 12.5}) {
    const SquareMatrix expected = SquareMatrix::identity(4) * std::cos(wt) + A * std::sin(wt);
    CHECK(max_norm(expm(A * wt) - expected) < 1e-13 * std::max(1.0, wt));
  }
  const SquareMatrix diag = SquareMatrix::diagonal({1.0, -2.0, 0.5});
  const SquareMatrix e = expm(diag);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(expm(SquareMatrix::diagonal({1e6})), Error);
}

TEST_CASE("expm relative accuracy against a Taylor oracle") {
  // Nilpotent-plus-diagonal case with exact answer.
  const double lam = 3.0;
  const SquareMatrix a{{lam, 1.0, 0.0}, {0.0, lam, 1.0}, {0.0, 0.0, lam}};
  const double el = std::exp(lam);
  const SquareMatrix expected{{el, el, el / 2}, {0, el, el}, {0, 0, el}};
  CHECK(max_norm(expm(a) - expected) / max_norm(expected) < 1e-13);
  // Larger norm: rotation generator with angle 9.
  const SquareMatrix rot = expm(J * 9.0);
  CHECK(max_norm(rot - rotation(9.0)) < 1e-13);
}

TEST_CASE("property: expm(A) expm(-A) = I") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + i % 5;
    const SquareMatrix a = random_matrix(rng, n, 5.0);
    CHECK(max_norm(expm(a) * expm(-a) - SquareMatrix::identity(n)) <= 1e-10 * n);
  }
}

TEST_CASE("property: det(expm(A)) = exp(trace A)") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + i % 5;
    const SquareMatrix a = random_matrix(rng, n, 5.0);
    const double expected = std::exp(a.trace());
    CHECK(std::abs(determinant(expm(a)) - expected) <= 1e-10 * expected);
  }
}

TEST_CASE("logm_real examples") {
  CHECK(max_norm(logm_real(SquareMatrix::identity(3))) < 1e-15);
  try {
    logm_real(SquareMatrix::diagonal({-1.0, -2.0}));
    FAIL("expected NoRealLogarithm");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRealLogarithm);
  }
  CHECK(max_norm(logm_real(rotation(1.0)) - J) < 1e-10);
  // -I is a rotation by pi: a real logarithm exists (negative eigenvalue of even multiplicity).
  const SquareMatrix l = logm_real(-SquareMatrix::identity(2));
  CHECK(max_norm(expm(l) + SquareMatrix::identity(2)) < 1e-12);
  // Repeated negative eigenvalue in a Jordan block has no real logarithm.
  CHECK_THROWS_AS(logm_real(SquareMatrix{{-1, 1}, {0, -1}}), Error);
  CHECK_THROWS_AS(logm_real(SquareMatrix{{1, 2}, {2, 4}}), NearSingularError);
  // Positive diagonal.
  const SquareMatrix d = logm_real(SquareMatrix::diagonal({2.0, 0.5, 7.0}));
  CHECK(d(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  CHECK(d(2, 2) == doctest::Approx(std::log(7.0)).epsilon(1e-13));
}

TEST_CASE("probe: diag(-1,-2) is not the exponential of any real 2x2 matrix") {
  // Independent oracle: random search plus coordinate descent over real
  // generators never gets close to the target.
  const SquareMatrix target = SquareMatrix::diagonal({-1.0, -2.0});
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double best = std::numeric_limits<double>::infinity();
  for (int start = 0; start < 200; ++start) {
    SquareMatrix x{{u(rng), u(rng)}, {u(rng), u(rng)}};
    double fx = max_norm(expm(x) - target);
    double step = 0.5;
    for (int it = 0; it < 300 && step > 1e-6; ++it) {
      bool improved = false;
      for (std::size_t k = 0; k < 4; ++k) {
        for (double dir : {-1.0, 1.0}) {
          SquareMatrix y = x;
          y.data()[k] += dir * step;
          const double fy = max_norm(expm(y) - target);
          if (fy < fx) {
            x = y;
            fx = fy;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    best = std::min(best, fx);
  }
  CHECK(best > 0.2);
}

TEST_CASE("property: logm_real inverts expm") {
  std::mt19937_64 rng(555);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + i % 5;
    const SquareMatrix a = random_log_safe(rng, n);
    const SquareMatrix l = logm_real(expm(a));
    INFO("case ", i);
    CHECK(max_norm(l - a) <= 1e-8);
  }
}

TEST_CASE("eigenvalues") {
  auto ev = eigenvalues(SquareMatrix::diagonal({3.0, 2.0})).eigenvalues;
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == std::complex<double>(2.0, 0.0));
  CHECK(ev[1] == std::complex<double>(3.0, 0.0));

  // Characteristic polynomial l^2 + l - 1 = 0.
  ev = eigenvalues(SquareMatrix{{-1, 1}, {1, 0}}).eigenvalues;
  CHECK(ev[0].real() == doctest::Approx((-1 - std::sqrt(5.0)) / 2).epsilon(1e-12));
  CHECK(ev[1].real() == doctest::Approx((-1 + std::sqrt(5.0)) / 2).epsilon(1e-12));
  CHECK(ev[0].imag() == 0.0);

  ev = eigenvalues(J).eigenvalues;
  CHECK(std::abs(ev[0] - std::complex<double>(0, -1)) < 1e-14);
  CHECK(std::abs(ev[1] - std::complex<double>(0, 1)) < 1e-14);

  // Conjugate pairs for a random real matrix.
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto spec = eigenvalues(random_matrix(rng, 5, 4.0)).eigenvalues;
    CHECK(spec.size() == 5);
    for (auto z : spec) {
      if (z.imag() == 0.0) continue;
      bool found = false;
      for (auto w : spec) found = found || w == std::conj(z);
      CHECK(found);
    }
  }
}
