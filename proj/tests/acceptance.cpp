// Acceptance run: one [PASS]/[FAIL] line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "floquet.hpp"
#include "gallery.hpp"
#include "gauge.hpp"
#include "riccati.hpp"

using namespace fg;

namespace {

const double pi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

// Collects measured quantities and the verdict of one criterion.
class Criterion {
 public:
  void at_most(const std::string& what, double value, double tol) { record(what, value, value <= tol, "<=", tol); }
  void at_least(const std::string& what, double value, double tol) { record(what, value, value >= tol, ">=", tol); }
  void require(const std::string& what, bool ok) {
    pass_ = pass_ && ok;
    if (!ok) detail_ += (detail_.empty() ? "" : "; ") + what + " FAILED";
  }
  void fail(const std::string& why) { require(why, false); }
  bool passed() const { return pass_; }
  const std::string& detail() const { return detail_; }

 private:
  void record(const std::string& what, double value, bool ok, const char* op, double tol) {
    char buf[200];
    if (ok)
      std::snprintf(buf, sizeof buf, "%s=%.3g", what.c_str(), value);
    else
      std::snprintf(buf, sizeof buf, "%s=%.3g FAILED, need %s %.3g", what.c_str(), value, op, tol);
    detail_ += (detail_.empty() ? "" : "; ") + std::string(buf);
    pass_ = pass_ && ok;
  }
  bool pass_ = true;
  std::string detail_;
};

int failures = 0;

void run(const char* id, const char* title, const std::function<void(Criterion&)>& body) {
  Criterion c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.fail(std::string("exception: ") + e.what());
  }
  std::printf("[%s] %s %s: %s\n", c.passed() ? "PASS" : "FAIL", id, title, c.detail().c_str());
  std::fflush(stdout);
  failures += !c.passed();
}

SquareMatrix rot(double a) { return {{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}}; }

const Check& check(const Report& r, const std::string& name) {
  const Check* c = r.find(name);
  if (!c) throw std::runtime_error("report " + r.name + " has no check " + name);
  return *c;
}

std::vector<double> interior_grid(Interval d, std::size_t n) {
  std::vector<double> g;
  for (std::size_t k = 0; k < n; ++k) g.push_back(d[0] + (d[1] - d[0]) * (k + 0.5) / static_cast<double>(n));
  return g;
}

// Residual of the stated convention y = P_s x: P_s' = B P_s - P_s A.
double stated_transport_residual(const ExampleSpec& s, const std::vector<double>& grid) {
  double worst = 0.0;
  for (double t : grid) {
    const SquareMatrix p = s.p_stated->value(t);
    worst = std::max(worst, max_norm(s.p_stated->derivative(t) - *s.b_known * p + p * s.a.value(t)));
  }
  return worst;
}

void ac1(Criterion& c) {
  const auto start = Clock::now();
  const TimeMatrix a = TimeMatrix::parse(2, {"1", "cos(t)", "-cos(t)", "1"});
  const FloquetDecomposition dec = floquet_decompose(a, 2 * pi);
  const Report r = verify_decomposition(dec, a, 1e-6);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

  c.require("not doubled", !dec.doubled);
  c.at_most("|B-I|", max_norm(dec.B - SquareMatrix::identity(2)), 1e-6);
  c.at_most("|P(t+2pi)-P(t)|", check(r, "p_periodicity").value, 1e-6);
  // Closed form: Phi(t) = e^t R(-sin t), P(t) = R(-sin t).
  double phi_gap = 0.0, p_gap = 0.0, p_period = 0.0;
  for (double t : uniform_grid(0.0, 2 * pi, 100)) {
    const SquareMatrix phi = std::exp(t) * rot(-std::sin(t));
    phi_gap = std::max(phi_gap, max_norm(phi - dec.P.value(t) * expm(dec.B * t)));
    p_gap = std::max(p_gap, max_norm(dec.P.value(t) - rot(-std::sin(t))));
  }
  for (double t : uniform_grid(0.0, 2 * pi, 100)) {
    const double s = std::fmod(t + 2 * pi, 2 * pi);
    p_period = std::max(p_period, max_norm(rot(-std::sin(t + 2 * pi)) - dec.P.value(s)));
  }
  c.at_most("|Phi-P exp(Bt)|", phi_gap, 1e-6);
  c.at_most("|P-R(-sin t)|", p_gap, 1e-6);
  c.at_most("|P_exact(t+2pi)-P(t)|", p_period, 1e-6);
  c.require("verify_decomposition", r.passed());
  c.at_most("seconds", seconds, 1.0);
}

void ac2(Criterion& c) {
  for (const char* name : {"example7", "example8", "example9"}) {
    const ExampleSpec s = build_example(name);
    const auto grid = interior_grid(s.domain, 50);
    const std::string tag = std::string(name).substr(7);
    c.at_most("ex" + tag + " |P'-AP+PB|", transport_residual(s.a, GaugeTransform(*s.p_known, s.domain), *s.b_known, grid),
              1e-10);
    c.at_most("ex" + tag + " stated-frame residual", stated_transport_residual(s, grid), 1e-10);
    const Report r = verify_example(s);
    c.at_most("ex" + tag + " report", check(r, "transport_residual").value, 1e-10);
  }
  // Stated signs of the exponential example fail; the corrected reading passes
  // and the discrepancy is recorded.
  const ExampleSpec s7 = build_example("example7");
  const Report r7 = verify_example(s7);
  const Check& stated = check(r7, "stated_b_transport_residual");
  c.require("ex7 stated-sign discrepancy recorded", !stated.assertable && !stated.note.empty());
  c.at_least("ex7 stated-sign residual", stated.value, 0.1);
  bool noted = false;
  for (const auto& n : s7.notes) noted = noted || n.find("inconsistent") != std::string::npos;
  c.require("ex7 note", noted);
}

void ac3(Criterion& c) {
  const std::pair<const char*, const char*> cases[] = {{"example8", "x' = -1 + x^2"}, {"example9", "x' = 1 - x - x^2"}};
  for (const auto& [name, text] : cases) {
    const ExampleSpec s = build_example(name);
    const TimeMatrix a_hat = push_linear(s.a, GaugeTransform(*s.p_known, s.domain));
    const std::string tag = std::string(name).substr(7);
    c.at_most("ex" + tag + " |A_hat-B|", constancy_deviation(a_hat, *s.b_known, uniform_grid(s.domain[0], s.domain[1], 200)),
              1e-8);
    const RiccatiCoefficients rc = readback(*s.b_known);
    c.require("ex" + tag + " readback exact",
              rc.f == s.transformed->f && rc.g == s.transformed->g && rc.h == s.transformed->h);
    c.require("ex" + tag + " equation " + text, riccati_equation_text(rc) == text);
  }
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> mag(0.2, 1.5);
  std::bernoulli_distribution sign;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const double k0 = (sign(rng) ? 1 : -1) * mag(rng);
    const double k1 = (sign(rng) ? 1 : -1) * mag(rng);
    const double beta = (sign(rng) ? 1 : -1) * mag(rng);
    const ExampleSpec s = build_example("example7", {{{"k0", k0}, {"k1", k1}, {"beta", beta}}, {}});
    const TimeMatrix a_hat = push_linear(s.a, GaugeTransform(*s.p_known, s.domain));
    worst = std::max(worst, constancy_deviation(a_hat, *s.b_known, uniform_grid(s.domain[0], s.domain[1], 50)));
    const RiccatiCoefficients rc = readback(*s.b_known);
    c.require("ex7 r0 = k0, r1 = k1 + beta", rc.f == k0 && rc.g == k1 + beta && rc.h == 1.0);
  }
  c.at_most("ex7 random |A_hat-B|", worst, 1e-8);
}

void ac4(Criterion& c) {
  const auto y = su2_basis();
  const SquareMatrix I4 = SquareMatrix::identity(4);
  bool relations = true;
  for (int i = 1; i <= 3; ++i) relations = relations && y[i] * y[i] == -I4;
  relations = relations && y[1] * y[2] == y[3] && y[2] * y[3] == y[1] && y[3] * y[1] == y[2];
  c.require("Y_i^2 = -I, Y_i Y_j = Y_k", relations);

  for (const char* name : {"example5", "example6"}) {
    const ExampleSpec s = build_example(name);
    const std::string tag = std::string(name).substr(7);
    const auto grid = interior_grid(s.domain, 50);
    double ortho = 0.0;
    for (double t : grid) {
      const SquareMatrix m = s.p_stated->value(t);
      ortho = std::max(ortho, max_norm(m.transpose() * m - I4));
    }
    c.at_most("ex" + tag + " |M^T M - I|", ortho, 1e-12);
    c.at_most("ex" + tag + " gauge residual",
              transport_residual(s.a, GaugeTransform(*s.p_known, s.domain), *s.b_known, grid), 1e-10);
    const Report r = verify_example(s);
    c.require("ex" + tag + " report passes", r.passed());
    const Check& k = check(r, "stated_k_deviation");
    c.require("ex" + tag + " K comparison informational", !k.assertable);
    c.require("ex" + tag + " K table", r.data["k_discrepancy"].size() == 50);
  }
  const ExampleSpec six = build_example("example6");
  bool commute = true;
  for (int i = 1; i <= 3; ++i) commute = commute && commutator(y[i], *six.b_known) == SquareMatrix(4);
  c.require("[Y_i, L] = 0", commute);
}

void ac5(Criterion& c) {
  const NonlinearTerm radial = NonlinearTerm::parse({"(1 - x1^2 - x2^2)*x1", "(1 - x1^2 - x2^2)*x2"}, {}, true);
  const Report eq = equivariance_check(radial, random_rotations(2, 20, 4242), 1e-10);
  c.at_most("radial equivariance", eq.checks.at(0).value, 1e-10);

  // beta(t) = 0.3 + sin t; x = R(beta) y.
  const TimeMatrix r_beta =
      TimeMatrix::parse(2, {"cos(0.3 + sin(t))", "-sin(0.3 + sin(t))", "sin(0.3 + sin(t))", "cos(0.3 + sin(t))"});
  const GaugeTransform g(r_beta);
  const NonlinearTerm f = push_nonlinear(radial, g);
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> ut(0.0, 2 * pi), uy(-2.0, 2.0);
  double invariance = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = ut(rng);
    const std::vector<double> y{uy(rng), uy(rng)};
    const auto a = f(t, y), b = radial(t, y);
    invariance = std::max({invariance, std::abs(a[0] - b[0]), std::abs(a[1] - b[1])});
  }
  c.at_most("gauge invariance F=N", invariance, 1e-10);

  const NonlinearTerm product = NonlinearTerm::parse({"(1 - x1*x2)*x1", "(1 - x1*x2)*x2"}, {}, true);
  const Report bad = equivariance_check(product, random_rotations(2, 20, 4242), 1e-10);
  c.at_least("product-term equivariance deviation", bad.checks.at(0).value, 0.1);

  // Transformed bracket: 1 + sin(2b)/2 (y^2 - x^2) - cos(2b) x y.
  const NonlinearTerm fp = push_nonlinear(product, g);
  double bracket = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = ut(rng);
    const double x = uy(rng), yv = uy(rng);
    const double b = 0.3 + std::sin(t);
    const double br = 1.0 + 0.5 * std::sin(2 * b) * (yv * yv - x * x) - std::cos(2 * b) * x * yv;
    const auto v = fp(t, std::vector<double>{x, yv});
    bracket = std::max({bracket, std::abs(v[0] - br * x), std::abs(v[1] - br * yv)});
  }
  c.at_most("stated bracket", bracket, 1e-9);
  const Report ex4 = verify_example("example4");
  c.at_most("example4 stated bracket", check(ex4, "stated_bracket_rotation_plus_beta").value, 1e-9);
}

void ac6(Criterion& c) {
  std::mt19937_64 rng(8128);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ParamMap p{{"a0", u(rng)}, {"a1", u(rng)}, {"w", 1 + u(rng)}, {"b0", u(rng)}, {"b1", u(rng)},
                     {"c0", 0.6 + std::abs(u(rng))}, {"c1", u(rng)}};
    const ScalarRiccati r = ScalarRiccati::parse("a0 + a1*sin(w*t)", "b0 + b1*cos(t)", "c0 + c1*sin(t)", u(rng), p);
    const RiccatiSolution s = solve_scalar(r, {0.0, 1.0});
    if (!s.poles().empty()) {
      c.fail("random Riccati trial has a pole");
      return;
    }
    const Trajectory direct = integrate_riccati_direct(r, {0.0, 1.0});
    for (double t : uniform_grid(0.0, 1.0, 101)) worst = std::max(worst, std::abs(s.value(t) - direct.eval(t)[0]));
  }
  c.at_most("projective vs direct (20 random)", worst, 1e-6);

  const ScalarRiccati sec_tan = build_example("example8").riccati.value();
  const Report inv = alpha_invariance(sec_tan, {parse("0"), parse("1"), parse("sin(t)")}, {-1.2, 1.2}, 1e-6);
  double alpha_dev = 0.0;
  for (const auto& chk : inv.checks) alpha_dev = std::max(alpha_dev, chk.value);
  c.at_most("alpha invariance {0,1,sin t}", alpha_dev, 1e-6);
  c.require("alpha invariance report", inv.passed());

  RiccatiOptions cont;
  cont.continue_through_poles = true;
  const RiccatiSolution tan = solve_scalar(ScalarRiccati::parse("1", "0", "1", 0.0), {0.0, 2.0}, cont);
  c.require("one pole", tan.poles().size() == 1);
  if (tan.poles().size() == 1) c.at_most("|pole - pi/2|", std::abs(tan.poles()[0] - pi / 2), 1e-6);

  // Y' = M11 Y + M12 - Y M22 with diagonal M11, M22:
  // Y_ij = c_ij (exp(l t) - 1) / l + Y0_ij exp(l t), l = a_i - d_j.
  const double a[2] = {-1.0, -2.0}, d[2] = {0.5, 1.0};
  const SquareMatrix cm{{1, 2}, {3, 4}}, y0{{0.5, -1}, {0.25, 2}};
  MatrixRiccati m;
  m.m11 = TimeMatrix::constant(SquareMatrix::diagonal({a[0], a[1]}));
  m.m12 = TimeMatrix::constant(cm);
  m.m21 = TimeMatrix::constant(SquareMatrix(2));
  m.m22 = TimeMatrix::constant(SquareMatrix::diagonal({d[0], d[1]}));
  m.y0 = y0;
  const RiccatiSolution ms = solve_matrix(m, {0.0, 3.0});
  double syl = 0.0;
  for (double t : uniform_grid(0.0, 3.0, 61)) {
    const SquareMatrix y = ms.matrix_value(t);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double l = a[i] - d[j];
        syl = std::max(syl, std::abs(y(i, j) - (cm(i, j) * std::expm1(l * t) / l + y0(i, j) * std::exp(l * t))));
      }
  }
  c.at_most("matrix vs Sylvester oracle", syl, 1e-7);
}

// Random matrix with eigenvalue arguments bounded away from +-pi.
SquareMatrix random_log_safe(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> re(-1.5, 1.5);
  std::uniform_real_distribution<double> im(-(pi - 0.1), pi - 0.1);
  SquareMatrix d(n);
  for (std::size_t i = 0; i < n;) {
    if (i + 1 < n && std::bernoulli_distribution()(rng)) {
      const double x = re(rng), y = im(rng);
      d(i, i) = d(i + 1, i + 1) = x;
      d(i, i + 1) = -y;
      d(i + 1, i) = y;
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

void ac7(Criterion& c) {
  std::mt19937_64 rng(500);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  double round_trip = 0.0;
  for (int k = 0; k < 500; ++k) {
    const SquareMatrix a = random_log_safe(rng, dim(rng));
    const SquareMatrix e = expm(a);
    round_trip = std::max(round_trip, max_norm(logm_real(e) - a) / std::max(1.0, max_norm(a)));
    round_trip = std::max(round_trip, max_norm(expm(logm_real(e)) - e) / std::max(1.0, max_norm(e)));
  }
  c.at_most("expm/logm round trip (500)", round_trip, 1e-8);

  bool no_log = false;
  try {
    logm_real(SquareMatrix::diagonal({-1.0, -2.0}));
  } catch (const Error& e) {
    no_log = e.code() == ErrorCode::NoRealLogarithm;
  }
  c.require("logm_real(diag(-1,-2)) -> NoRealLogarithm", no_log);

  // Phi(1) = diag(-1, -2): P rotates by pi t, B = diag(0, ln 2).
  const ParamMap p{{"c", std::log(2.0)}};
  const TimeMatrix half = TimeMatrix::parse(
      2, {"c*sin(pi*t)^2", "-pi - c*sin(pi*t)*cos(pi*t)", "pi - c*sin(pi*t)*cos(pi*t)", "c*cos(pi*t)^2"}, p);
  const FloquetDecomposition dec = floquet_decompose(half, 1.0);
  c.at_most("|monodromy - diag(-1,-2)|", max_norm(dec.monodromy - SquareMatrix::diagonal({-1.0, -2.0})), 1e-8);
  c.require("period doubled", dec.doubled);
  c.require("doubled decomposition verifies at 1e-6", verify_decomposition(dec, half, 1e-6).passed());

  const TimeMatrix radial = TimeMatrix::parse(2, {"1", "cos(t)", "-cos(t)", "1"});
  const TimeMatrix mixed = TimeMatrix::parse(3, {"sin(t)", "1", "0", "-1", "0.2", "cos(2*t)", "0", "0.5", "-0.3"});
  double liouville = 0.0;
  liouville = std::max(liouville, liouville_residual(dec.phi, half));
  liouville = std::max(liouville, liouville_residual(floquet_decompose(radial, 2 * pi).phi, radial));
  liouville = std::max(liouville, liouville_residual(fundamental_matrix(mixed, 2 * pi), mixed));
  c.at_most("Liouville relative", liouville, 1e-6);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void ac8(Criterion& c) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / ("fg_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  const fs::path runs[2] = {base / "a", base / "b"};
  for (int k = 0; k < 2; ++k) {
    const std::string cmd = std::string("\"") + FG_CLI_PATH + "\" examples --out \"" + runs[k].string() + "\" > \"" +
                            (base / ("log" + std::to_string(k))).string() + "\" 2>&1";
    fs::create_directories(base);
    const auto start = Clock::now();
    const int status = std::system(cmd.c_str());
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    c.require("run " + std::to_string(k + 1) + " exit 0", status == 0);
    c.at_most("run " + std::to_string(k + 1) + " seconds", seconds, 60.0);
  }
  std::size_t files = 0;
  bool identical = true;
  for (const auto& entry : fs::directory_iterator(runs[0])) {
    const fs::path other = runs[1] / entry.path().filename();
    identical = identical && fs::exists(other) && slurp(entry.path()) == slurp(other);
    ++files;
  }
  std::size_t other_files = std::distance(fs::directory_iterator(runs[1]), fs::directory_iterator());
  c.require("same file set", files == other_files && files >= 10);
  c.require("byte-identical outputs (" + std::to_string(files) + " files)", identical);
  const std::string summary = slurp(runs[0] / "summary.json");
  c.require("summary passed", summary.find("\"passed\": true\n}") != std::string::npos);
  fs::remove_all(base);
}

}  // namespace

int main() {
  run("AC1", "Floquet reconstruction", ac1);
  run("AC2", "transport-equation consistency", ac2);
  run("AC3", "constancy of the transformed matrix", ac3);
  run("AC4", "SU(2) example", ac4);
  run("AC5", "equivariance", ac5);
  run("AC6", "Riccati cross-validation", ac6);
  run("AC7", "numerics kernels", ac7);
  run("AC8", "end-to-end CLI", ac8);
  return failures;
}
