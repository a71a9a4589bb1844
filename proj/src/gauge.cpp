#include "gauge.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace fg {

namespace {

std::string describe(double t) {
  std::ostringstream s;
  s.precision(17);
  s << t;
  return s.str();
}

bool bounded(Interval d) { return std::isfinite(d[0]) && std::isfinite(d[1]); }

double clamp_into(Interval d, double t) { return std::min(std::max(t, d[0]), d[1]); }

std::vector<double> act(const SquareMatrix& m, std::span<const double> x) {
  const std::size_t n = m.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += m(i, j) * x[j];
  return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void check_determinant(const TimeMatrix& p, const std::vector<double>& grid) {
  const double n = static_cast<double>(p.size());
  double running = 0.0;
  for (double t : grid) {
    const SquareMatrix m = p.value(t);
    running = std::max(running, std::pow(max_norm(m), n));
    const double det = determinant(m);
    if (!(std::abs(det) >= GaugeTransform::kSingularRatio * running)) {
      throw NearSingularError(det, t, true, "gauge matrix near singular at t = " + describe(t) + " (det = " +
                                                describe(det) + ")");
    }
  }
}

}  // namespace

// --- GaugeTransform -----------------------------------------------------------

GaugeTransform::GaugeTransform(TimeMatrix p, std::size_t check_points) : GaugeTransform(p, p.domain(), check_points) {}

GaugeTransform::GaugeTransform(TimeMatrix p, Interval domain, std::size_t check_points)
    : p_(p.restricted(domain)) {
  const Interval d = p_.domain();
  if (bounded(d) && check_points > 1) {
    check_determinant(p_, uniform_grid(d[0], d[1], check_points));
  } else {
    check_determinant(p_, {clamp_into(d, 0.0)});
  }
}

GaugeTransform GaugeTransform::identity(std::size_t n) {
  return GaugeTransform(TimeMatrix::constant(SquareMatrix::identity(n)));
}

SquareMatrix GaugeTransform::inverse(double t) const {
  try {
    return fg::inverse(p_.value(t));
  } catch (const NearSingularError& e) {
    throw NearSingularError(e.determinant(), t, true, "gauge matrix singular at t = " + describe(t));
  }
}

// --- NonlinearTerm ------------------------------------------------------------

NonlinearTerm NonlinearTerm::parse(const std::vector<std::string>& components, const ParamMap& params,
                                   bool autonomous) {
  std::vector<Expression> exprs;
  exprs.reserve(components.size());
  for (const auto& c : components) exprs.push_back(fg::bind(fg::parse(c), params));
  return from_expressions(std::move(exprs), autonomous);
}

NonlinearTerm NonlinearTerm::from_expressions(std::vector<Expression> components, bool autonomous) {
  const std::size_t n = components.size();
  if (n == 0) throw Error(ErrorCode::Dimension, "nonlinear term needs at least one component");
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& sym : free_symbols(components[k])) {
      if (sym == "t") {
        if (autonomous)
          throw Error(ErrorCode::InvalidArgument,
                      "component " + std::to_string(k + 1) + " depends on t but the term is declared autonomous");
        continue;
      }
      bool state = sym.size() > 1 && sym[0] == 'x' && std::all_of(sym.begin() + 1, sym.end(), ::isdigit);
      if (state) {
        const unsigned long idx = std::stoul(sym.substr(1));
        state = idx >= 1 && idx <= n;
      }
      if (!state) throw Error(ErrorCode::UnboundSymbol, "unbound symbol '" + sym + "' in nonlinear term");
    }
  }
  NonlinearTerm term;
  term.n_ = n;
  term.autonomous_ = autonomous;
  term.exprs_ = std::move(components);
  return term;
}

NonlinearTerm NonlinearTerm::from_field(std::size_t n, Field field, bool autonomous) {
  if (n == 0 || !field) throw Error(ErrorCode::InvalidArgument, "nonlinear term needs a dimension and a callable");
  NonlinearTerm term;
  term.n_ = n;
  term.autonomous_ = autonomous;
  term.field_ = std::move(field);
  return term;
}

NonlinearTerm NonlinearTerm::zero(std::size_t n) {
  return from_field(n, [n](double, std::span<const double>) { return std::vector<double>(n, 0.0); }, true);
}

std::vector<double> NonlinearTerm::operator()(double t, std::span<const double> x) const {
  if (x.size() != n_)
    throw Error(ErrorCode::Dimension, "nonlinear term expects " + std::to_string(n_) + " states, got " +
                                          std::to_string(x.size()));
  if (field_) return field_(t, x);
  std::vector<double> out(n_);
  const Environment env{t, x, nullptr};
  for (std::size_t k = 0; k < n_; ++k) out[k] = eval(exprs_[k], env);
  return out;
}

// --- Linear push-forward and transport -----------------------------------------

TimeMatrix push_linear(const TimeMatrix& a, const GaugeTransform& p, std::size_t grid_points) {
  if (a.size() != p.size()) throw Error(ErrorCode::Dimension, "gauge and system dimensions differ");
  const Interval dom = intersect(a.domain(), p.domain());
  auto value = [a, p](double t) {
    const SquareMatrix pt = p.value(t);
    const SquareMatrix inv = p.inverse(t);
    return inv * (a.value(t) * pt - p.derivative(t));
  };
  if (bounded(dom) && grid_points > 1) {
    for (double t : uniform_grid(dom[0], dom[1], grid_points)) {
      if (!value(t).all_finite())
        throw Error(ErrorCode::Domain, "transformed matrix not finite at t = " + describe(t));
    }
  }
  return TimeMatrix::function(a.size(), value, nullptr, dom);
}

TransportSolution solve_transport(const TimeMatrix& a, const SquareMatrix& b, const SquareMatrix& p0,
                                  std::array<double, 2> span, const IntegratorOptions& opts) {
  const std::size_t n = a.size();
  if (b.size() != n || p0.size() != n) throw Error(ErrorCode::Dimension, "transport: A, B and P0 dimensions differ");
  if (!(span[0] != span[1])) throw Error(ErrorCode::InvalidArgument, "transport: empty span");
  (void)inverse_with_det(p0);
  MatrixRhs rhs = [&a, &b](double t, const SquareMatrix& p) { return a.value(t) * p - p * b; };

  TransportSolution out;
  const bool forward = span[1] > span[0];
  Trajectory tr;
  try {
    tr = integrate_matrix(rhs, p0, span, opts);
  } catch (const IntegrationError& e) {
    const double last = e.last_good_time();
    if (last == span[0]) throw;
    out.warnings.push_back(std::string("transport integration stopped: ") + e.what());
    IntegratorOptions o = opts;
    std::erase_if(o.stops, [&](double s) { return forward ? s >= last : s <= last; });
    tr = integrate_matrix(rhs, p0, {span[0], last}, o);
    out.trimmed = true;
  }

  // Scan outward from the anchor for det collapse.
  const std::size_t count = tr.size();
  const double dn = static_cast<double>(n);
  double running = 0.0;
  std::size_t first = 0, last = count - 1;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = forward ? k : count - 1 - k;
    const SquareMatrix p = tr.eval_matrix(tr.times()[i]);
    running = std::max(running, std::pow(max_norm(p), dn));
    if (std::abs(determinant(p)) < GaugeTransform::kSingularRatio * running) {
      if (k < 2) throw NearSingularError(determinant(p), tr.times()[i], true, "transport: P singular at the anchor");
      if (forward) {
        last = i - 1;
      } else {
        first = i + 1;
      }
      out.trimmed = true;
      out.warnings.push_back("det P collapsed near t = " + describe(tr.times()[i]) + "; domain trimmed");
      break;
    }
  }
  if (first != 0 || last != count - 1) tr = tr.slice(first, last);
  out.domain = {tr.t_begin(), tr.t_end()};
  out.gauge = GaugeTransform(TimeMatrix::sampled(std::move(tr)), 0);
  return out;
}

double transport_residual(const TimeMatrix& a, const GaugeTransform& p, const SquareMatrix& b,
                          const std::vector<double>& grid) {
  double worst = 0.0;
  for (double t : grid) {
    const SquareMatrix pt = p.value(t);
    worst = std::max(worst, max_norm(p.derivative(t) - a.value(t) * pt + pt * b));
  }
  return worst;
}

double constancy_deviation(const TimeMatrix& a_hat, const SquareMatrix& b, const std::vector<double>& grid) {
  double worst = 0.0;
  for (double t : grid) worst = std::max(worst, max_norm(a_hat.value(t) - b));
  return worst;
}

// --- Nonlinear terms ------------------------------------------------------------

NonlinearTerm push_nonlinear(const NonlinearTerm& n, const GaugeTransform& p) {
  if (n.size() != p.size()) throw Error(ErrorCode::Dimension, "gauge and nonlinear term dimensions differ");
  return NonlinearTerm::from_field(n.size(), [n, p](double t, std::span<const double> y) {
    const std::vector<double> x = act(p.value(t), y);
    return act(p.inverse(t), n(t, x));
  });
}

Report equivariance_check(const NonlinearTerm& n, const std::vector<SquareMatrix>& group_samples, double tol,
                          const EquivarianceOptions& opts) {
  Report report;
  report.name = "equivariance";
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  std::uniform_real_distribution<double> ut(0.0, opts.time_range);
  double worst = 0.0;
  std::size_t worst_sample = 0;
  for (std::size_t s = 0; s < group_samples.size(); ++s) {
    const SquareMatrix& g = group_samples[s];
    if (g.size() != n.size()) throw Error(ErrorCode::Dimension, "group sample dimension differs from N");
    (void)inverse_with_det(g);
    for (std::size_t k = 0; k < opts.points_per_sample; ++k) {
      std::vector<double> x(n.size());
      for (double& v : x) v = ux(rng);
      const double t = ut(rng);
      const double dev = max_abs_diff(n(t, act(g, x)), act(g, n(t, x)));
      if (dev > worst) {
        worst = dev;
        worst_sample = s;
      }
    }
  }
  std::ostringstream grid;
  grid << group_samples.size() << " group samples x " << opts.points_per_sample << " random states, seed "
       << opts.seed;
  report.add("equivariance", worst, tol, grid.str(), "max ||N(g x, t) - g N(x, t)||");
  report.data["samples"] = group_samples.size();
  report.data["worst_sample"] = worst_sample;
  report.data["seed"] = opts.seed;
  return report;
}

std::vector<SquareMatrix> random_rotations(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<SquareMatrix> out;
  out.reserve(count);
  while (out.size() < count) {
    // Gram-Schmidt on Gaussian columns, last column flipped to make det +1.
    SquareMatrix q(n);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      std::vector<double> v(n);
      for (double& x : v) x = gauss(rng);
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += q(i, k) * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q(i, k);
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-8) {
        ok = false;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) q(i, j) = v[i] / norm;
    }
    if (!ok) continue;
    if (determinant(q) < 0)
      for (std::size_t i = 0; i < n; ++i) q(i, n - 1) = -q(i, n - 1);
    out.push_back(q);
  }
  return out;
}

double covariant_derivative_residual(const Trajectory& x, const GaugeTransform& p, const SquareMatrix& b,
                                     const std::vector<double>& grid) {
  const Interval dom = intersect({x.t_begin(), x.t_end()}, p.domain());
  auto y = [&x, &p](double t) { return act(p.inverse(t), x.eval(t)); };
  const double h = 1e-3 * std::max(1.0, dom[1] - dom[0]) / 10.0;
  double worst = 0.0;
  for (double t : grid) {
    const std::vector<double> dy = fd_derivative(y, t, dom, h);
    const std::vector<double> by = act(b, y(t));
    worst = std::max(worst, max_abs_diff(dy, by));
  }
  return worst;
}

double predicted_determinant(const TimeMatrix& a, const SquareMatrix& b, const SquareMatrix& p0,
                             std::array<double, 2> span, const IntegratorOptions& opts) {
  const double tr_b = b.trace();
  VectorRhs rhs = [&a, tr_b](double t, std::span<const double>, std::span<double> d) { d[0] = a.value(t).trace() - tr_b; };
  IntegratorOptions o = opts;
  o.stops.clear();
  o.event = nullptr;
  const Trajectory integral = integrate_vector(rhs, {0.0}, span, o);
  return determinant(p0) * std::exp(integral.eval(span[1])[0]);
}

}  // namespace fg
