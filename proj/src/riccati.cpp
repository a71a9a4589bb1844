#include "riccati.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fg {

namespace {

std::string describe(double t) {
  std::ostringstream s;
  s.precision(17);
  s << t;
  return s.str();
}

void require_time_only(const Expression& e, const char* what) {
  for (const auto& sym : free_symbols(e))
    if (sym != "t") throw Error(ErrorCode::UnboundSymbol, std::string("unbound symbol '") + sym + "' in " + what);
}

// X = (X1; X2) stored row-major as a 2n x n block.
SquareMatrix block_rows(std::span<const double> x, std::size_t n, std::size_t first_row) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = x[(first_row + i) * n + j];
  return m;
}

RiccatiSolution solve_linear(const TimeMatrix& a, std::vector<double> x0, std::size_t n, std::array<double, 2> span,
                             const RiccatiOptions& opts) {
  const std::size_t rows = 2 * n;
  VectorRhs rhs = [&a, n, rows](double t, std::span<const double> x, std::span<double> dx) {
    const SquareMatrix m = a.value(t);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < rows; ++k) s += m(i, k) * x[k * n + j];
        dx[i * n + j] = s;
      }
  };
  auto denominator = [n](std::span<const double> x) {
    return n == 1 ? x[1] : determinant(block_rows(x, n, n));
  };
  IntegratorOptions o = opts.integrator;
  o.event = [denominator](double, std::span<const double> x) { return denominator(x); };
  o.terminate_on_event = !opts.continue_through_poles;
  Trajectory tr = integrate_vector(rhs, std::move(x0), span, o);

  const bool forward = span[1] > span[0];
  std::vector<double> poles = tr.events();
  std::vector<std::string> warnings;

  // Near-zero denominators without a sign change (touching zero) count too.
  const double dn = static_cast<double>(n);
  double running = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const std::size_t i = forward ? k : tr.size() - 1 - k;
    const auto x = tr.state(i);
    running = std::max(running, std::pow(max_norm(block_rows(x, n, n)), dn));
    const double t = tr.times()[i];
    const bool known = std::any_of(poles.begin(), poles.end(), [&](double p) { return std::abs(p - t) < 1e-6; });
    if (!known && std::abs(denominator(x)) < 1e-10 * running) {
      poles.push_back(t);
      warnings.push_back("denominator nearly vanishes at t = " + describe(t) + " without a sign change");
    }
  }
  std::sort(poles.begin(), poles.end());

  bool stopped = false;
  Interval domain{std::min(span[0], span[1]), std::max(span[0], span[1])};
  if (!poles.empty() && !opts.continue_through_poles) {
    stopped = true;
    if (forward) {
      poles.erase(poles.begin() + 1, poles.end());
      domain[1] = poles.front();
    } else {
      poles.erase(poles.begin(), poles.end() - 1);
      domain[0] = poles.back();
    }
    warnings.push_back("stopped at pole t = " + describe(poles.front()));
  }
  RiccatiSolution sol(std::move(tr), n, domain, std::move(poles), stopped);
  sol.warnings = std::move(warnings);
  return sol;
}

}  // namespace

// --- Equations ------------------------------------------------------------------

ScalarRiccati ScalarRiccati::parse(const std::string& f, const std::string& g, const std::string& h, double y0,
                                   const ParamMap& params, const std::string& alpha) {
  ScalarRiccati r;
  r.f = fg::bind(fg::parse(f), params);
  r.g = fg::bind(fg::parse(g), params);
  r.h = fg::bind(fg::parse(h), params);
  r.alpha = fg::bind(fg::parse(alpha), params);
  r.y0 = y0;
  require_time_only(r.f, "f");
  require_time_only(r.g, "g");
  require_time_only(r.h, "h");
  require_time_only(r.alpha, "alpha");
  return r;
}

ScalarRiccati ScalarRiccati::with_alpha(Expression a) const {
  require_time_only(a, "alpha");
  ScalarRiccati r = *this;
  r.alpha = std::move(a);
  return r;
}

TimeMatrix linearize_scalar(const ScalarRiccati& r, Interval working, std::size_t grid_points) {
  require_time_only(r.f, "f");
  require_time_only(r.g, "g");
  require_time_only(r.h, "h");
  require_time_only(r.alpha, "alpha");
  if (!(working[1] > working[0]) || !std::isfinite(working[0]) || !std::isfinite(working[1]))
    throw Error(ErrorCode::InvalidArgument, "Riccati working interval must be finite and non-empty");
  const std::vector<double> grid = uniform_grid(working[0], working[1], std::max<std::size_t>(grid_points, 2));
  std::vector<double> hv;
  hv.reserve(grid.size());
  double scale = 0.0;
  for (double t : grid) {
    hv.push_back(eval_at(r.h, t));
    scale = std::max(scale, std::abs(hv.back()));
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const bool tiny = std::abs(hv[k]) <= 1e-12 * std::max(1.0, scale);
    const bool flips = k > 0 && (hv[k] > 0) != (hv[k - 1] > 0);
    if (tiny || flips)
      throw Error(ErrorCode::Domain, "h(t) vanishes near t = " + describe(grid[k]) + "; the linearization needs h != 0");
  }
  return TimeMatrix::closed_form(2, {r.g + r.alpha, r.f, -r.h, r.alpha}, working);
}

TimeMatrix linearize_matrix(const MatrixRiccati& r) {
  const std::size_t n = r.size();
  for (const TimeMatrix* m : {&r.m11, &r.m12, &r.m21, &r.m22})
    if (m->size() != n) throw Error(ErrorCode::Dimension, "Riccati blocks must match the size of Y0");
  return block(r.m11, r.m12, r.m21, r.m22);
}

RiccatiCoefficients readback(const SquareMatrix& b) {
  if (b.size() != 2) throw Error(ErrorCode::Dimension, "Riccati readback needs a 2x2 matrix");
  return {b(0, 1), b(0, 0) - b(1, 1), -b(1, 0)};
}

IntegratorOptions RiccatiOptions::default_integrator() {
  IntegratorOptions o;
  o.abs_tol = 1e-12;
  o.rel_tol = 1e-10;
  return o;
}

// --- Solution -------------------------------------------------------------------

RiccatiSolution::RiccatiSolution(Trajectory linear, std::size_t n, Interval domain, std::vector<double> poles,
                                 bool stopped)
    : linear_(std::move(linear)), n_(n), domain_(domain), poles_(std::move(poles)), stopped_(stopped) {}

std::vector<Interval> RiccatiSolution::pieces() const {
  std::vector<Interval> out;
  double lo = domain_[0];
  for (double p : poles_) {
    if (p > lo && p < domain_[1]) {
      out.push_back({lo, p});
      lo = p;
    }
  }
  out.push_back({lo, domain_[1]});
  return out;
}

bool RiccatiSolution::near_pole(double t, double guard) const {
  return std::any_of(poles_.begin(), poles_.end(), [&](double p) { return std::abs(t - p) < guard; });
}

void RiccatiSolution::split(double t, SquareMatrix& x1, SquareMatrix& x2, bool derivative) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (t < domain_[0] - slack || t > domain_[1] + slack)
    throw Error(ErrorCode::OutOfRange, "time " + describe(t) + " outside the Riccati solution domain");
  const std::vector<double> x = derivative ? linear_.eval_derivative(t) : linear_.eval(t);
  x1 = block_rows(x, n_, 0);
  x2 = block_rows(x, n_, n_);
}

double RiccatiSolution::value(double t) const {
  if (n_ != 1) throw Error(ErrorCode::Dimension, "scalar value of a matrix Riccati solution");
  SquareMatrix u, v;
  split(t, u, v, false);
  return u(0, 0) / v(0, 0);
}

double RiccatiSolution::derivative(double t) const {
  if (n_ != 1) throw Error(ErrorCode::Dimension, "scalar derivative of a matrix Riccati solution");
  SquareMatrix u, v, du, dv;
  split(t, u, v, false);
  split(t, du, dv, true);
  return (du(0, 0) * v(0, 0) - u(0, 0) * dv(0, 0)) / (v(0, 0) * v(0, 0));
}

SquareMatrix RiccatiSolution::matrix_value(double t) const {
  SquareMatrix x1, x2;
  split(t, x1, x2, false);
  return x1 * inverse(x2);
}

SquareMatrix RiccatiSolution::matrix_derivative(double t) const {
  SquareMatrix x1, x2, d1, d2;
  split(t, x1, x2, false);
  split(t, d1, d2, true);
  const SquareMatrix inv = inverse(x2);
  return (d1 - x1 * inv * d2) * inv;
}

// --- Solvers --------------------------------------------------------------------

RiccatiSolution solve_scalar(const ScalarRiccati& r, std::array<double, 2> span, const RiccatiOptions& opts) {
  if (opts.projective_scale == 0.0 || !std::isfinite(opts.projective_scale))
    throw Error(ErrorCode::InvalidArgument, "projective scale must be finite and non-zero");
  const TimeMatrix a = linearize_scalar(r, {std::min(span[0], span[1]), std::max(span[0], span[1])});
  const double c = opts.projective_scale;
  return solve_linear(a, {c * r.y0, c}, 1, span, opts);
}

RiccatiSolution solve_matrix(const MatrixRiccati& r, std::array<double, 2> span, const RiccatiOptions& opts) {
  if (opts.projective_scale == 0.0 || !std::isfinite(opts.projective_scale))
    throw Error(ErrorCode::InvalidArgument, "projective scale must be finite and non-zero");
  const std::size_t n = r.size();
  const TimeMatrix a = linearize_matrix(r);
  std::vector<double> x0(2 * n * n, 0.0);
  const double c = opts.projective_scale;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) x0[i * n + j] = c * r.y0(i, j);
    x0[(n + i) * n + i] = c;
  }
  return solve_linear(a, std::move(x0), n, span, opts);
}

Trajectory integrate_riccati_direct(const ScalarRiccati& r, std::array<double, 2> span, const IntegratorOptions& opts) {
  VectorRhs rhs = [&r](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = eval_at(r.f, t) + eval_at(r.g, t) * y[0] + eval_at(r.h, t) * y[0] * y[0];
  };
  return integrate_vector(rhs, {r.y0}, span, opts);
}

double riccati_residual(const ScalarRiccati& r, const RiccatiSolution& sol, const std::vector<double>& grid,
                        double guard) {
  double worst = 0.0;
  const Interval d = sol.domain();
  for (double t : grid) {
    if (t < d[0] || t > d[1] || sol.near_pole(t, guard)) continue;
    const double y = sol.value(t);
    const double res = sol.derivative(t) - eval_at(r.f, t) - eval_at(r.g, t) * y - eval_at(r.h, t) * y * y;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double riccati_residual(const MatrixRiccati& r, const RiccatiSolution& sol, const std::vector<double>& grid,
                        double guard) {
  double worst = 0.0;
  const Interval d = sol.domain();
  for (double t : grid) {
    if (t < d[0] || t > d[1] || sol.near_pole(t, guard)) continue;
    const SquareMatrix y = sol.matrix_value(t);
    const SquareMatrix rhs = r.m11.value(t) * y + r.m12.value(t) - y * r.m21.value(t) * y - y * r.m22.value(t);
    worst = std::max(worst, max_norm(sol.matrix_derivative(t) - rhs));
  }
  return worst;
}

Report alpha_invariance(const ScalarRiccati& r, const std::vector<Expression>& alphas, std::array<double, 2> span,
                        double tol, std::size_t grid_points, double guard, const RiccatiOptions& opts) {
  Report report;
  report.name = "alpha_invariance";
  if (alphas.empty()) throw Error(ErrorCode::InvalidArgument, "alpha invariance needs at least one alpha");
  std::vector<RiccatiSolution> sols;
  sols.reserve(alphas.size());
  for (const auto& a : alphas) sols.push_back(solve_scalar(r.with_alpha(a), span, opts));

  const std::vector<double> grid = uniform_grid(std::min(span[0], span[1]), std::max(span[0], span[1]), grid_points);
  double worst = 0.0;
  std::size_t compared = 0;
  for (double t : grid) {
    bool usable = true;
    for (const auto& s : sols) {
      const Interval d = s.domain();
      if (t < d[0] || t > d[1] || s.near_pole(t, guard)) usable = false;
    }
    if (!usable) continue;
    ++compared;
    const double ref = sols.front().value(t);
    for (std::size_t k = 1; k < sols.size(); ++k) worst = std::max(worst, std::abs(sols[k].value(t) - ref));
  }
  std::ostringstream g;
  g << "uniform " << grid_points << " points on [" << grid.front() << ", " << grid.back() << "], guard " << guard;
  report.add("alpha_invariance", worst, tol, g.str(), "max |y_alpha(t) - y_alpha0(t)|");
  Json names = Json::array();
  for (const auto& a : alphas) names.push_back(to_string(a));
  report.data["alphas"] = names;
  report.data["compared_points"] = compared;
  report.data["poles"] = sols.front().poles();
  if (compared == 0) report.warnings.push_back("no grid point clear of poles; nothing compared");
  return report;
}

}  // namespace fg
