#include "floquet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fg {

namespace {

std::string grid_text(std::size_t points, double lo, double hi) {
  std::ostringstream s;
  s.precision(17);
  s << "uniform " << points << " points on [" << lo << ", " << hi << "]";
  return s.str();
}

IntegratorOptions with_stops(IntegratorOptions opts, const std::vector<double>& stops) {
  opts.stops.insert(opts.stops.end(), stops.begin(), stops.end());
  opts.event = nullptr;
  opts.terminate_on_event = false;
  return opts;
}

}  // namespace

IntegratorOptions floquet_integrator_defaults() {
  IntegratorOptions o;
  o.abs_tol = 1e-12;
  o.rel_tol = 1e-12;
  return o;
}

Trajectory fundamental_matrix(const TimeMatrix& a, double t_end, const IntegratorOptions& opts) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorCode::InvalidArgument, "fundamental matrix needs t_end > 0");
  const std::size_t n = a.size();
  MatrixRhs rhs = [&a](double t, const SquareMatrix& phi) { return a.value(t) * phi; };
  return integrate_matrix(rhs, SquareMatrix::identity(n), {0.0, t_end}, opts);
}

SquareMatrix monodromy(const TimeMatrix& a, double period, const IntegratorOptions& opts) {
  return fundamental_matrix(a, period, opts).eval_matrix(period);
}

void check_periodic(const TimeMatrix& a, double period, std::size_t samples, double tol) {
  double worst = 0.0;
  double worst_t = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = period * (static_cast<double>(k) + 0.37) / static_cast<double>(samples);
    const SquareMatrix at = a.value(t);
    const double dev = max_norm(a.value(t + period) - at) / std::max(1.0, max_norm(at));
    if (dev > worst) {
      worst = dev;
      worst_t = t;
    }
  }
  if (worst > tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "system matrix is not periodic with period " << period << ": ||A(t+T) - A(t)|| = " << worst
        << " at t = " << worst_t;
    throw Error(ErrorCode::Aperiodic, msg.str());
  }
}

FloquetDecomposition floquet_decompose(const TimeMatrix& a, double period, const FloquetOptions& opts) {
  if (!(period > 0.0) || !std::isfinite(period)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  if (opts.p_intervals == 0) throw Error(ErrorCode::InvalidArgument, "p_intervals must be positive");
  check_periodic(a, period, opts.periodicity_samples, opts.periodicity_tol);
  const std::size_t n = a.size();

  FloquetDecomposition dec;
  dec.period = period;

  auto integrate_over = [&](double t_eff) {
    std::vector<double> stops = uniform_grid(0.0, t_eff, opts.p_intervals + 1);
    stops.push_back(period);
    return fundamental_matrix(a, t_eff, with_stops(opts.integrator, stops));
  };

  dec.phi = integrate_over(period);
  dec.monodromy = dec.phi.eval_matrix(period);
  try {
    dec.B = logm_real(dec.monodromy) * (1.0 / period);
    dec.monodromy_effective = dec.monodromy;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoRealLogarithm) throw;
    dec.doubled = true;
    dec.phi = integrate_over(2.0 * period);
    dec.monodromy_effective = dec.phi.eval_matrix(2.0 * period);
    try {
      dec.B = logm_real(dec.monodromy_effective) * (1.0 / (2.0 * period));
    } catch (const Error& again) {
      if (again.code() != ErrorCode::NoRealLogarithm) throw;
      throw Error(ErrorCode::NoRealLogarithm, std::string("no real logarithm even after period doubling: ") + again.what());
    }
  }
  dec.multipliers = eigenvalues(dec.monodromy);

  const double t_eff = dec.effective_period();
  const std::vector<double> grid = uniform_grid(0.0, t_eff, opts.p_intervals + 1);
  std::vector<double> states, derivs;
  states.reserve(grid.size() * n * n);
  derivs.reserve(grid.size() * n * n);
  for (double t : grid) {
    const SquareMatrix p = t == 0.0 ? SquareMatrix::identity(n) : dec.phi.eval_matrix(t) * expm(dec.B * (-t));
    const SquareMatrix dp = a.value(t) * p - p * dec.B;
    states.insert(states.end(), p.values().begin(), p.values().end());
    derivs.insert(derivs.end(), dp.values().begin(), dp.values().end());
  }
  dec.P = TimeMatrix::sampled(Trajectory(grid, std::move(states), std::move(derivs), n * n, n));
  return dec;
}

Report verify_decomposition(const FloquetDecomposition& dec, const TimeMatrix& a, double tol, std::size_t grid_points,
                            const IntegratorOptions& opts) {
  Report report;
  report.name = "floquet_decomposition";
  const double t_eff = dec.effective_period();
  const std::size_t n = a.size();
  const std::vector<double> grid = uniform_grid(0.0, t_eff, grid_points);
  const std::string grid_desc = grid_text(grid_points, 0.0, t_eff);

  std::vector<double> stops = grid;
  for (double t : grid) stops.push_back(t + t_eff);
  Trajectory phi;
  try {
    phi = fundamental_matrix(a, 2.0 * t_eff, with_stops(opts, stops));
  } catch (const Error& e) {
    report.warnings.push_back(std::string("re-integration failed: ") + e.what());
    report.add("reintegration", std::numeric_limits<double>::infinity(), tol, grid_desc);
    return report;
  }

  double sup_phi = 0.0;
  double r_phi = 0.0, r_periodic = 0.0, r_gauge = 0.0;
  for (double t : grid) {
    const SquareMatrix phi_t = phi.eval_matrix(t);
    sup_phi = std::max(sup_phi, max_norm(phi_t));
    const SquareMatrix p = dec.P.value(t);
    r_phi = std::max(r_phi, max_norm(phi_t - p * expm(dec.B * t)));
    const double ts = t + t_eff;
    const SquareMatrix p_shift = phi.eval_matrix(ts) * expm(dec.B * (-ts));
    r_periodic = std::max(r_periodic, max_norm(p_shift - p));
    try {
      const SquareMatrix p_inv = inverse(p);
      r_gauge = std::max(r_gauge, max_norm(p_inv * a.value(t) * p - p_inv * dec.P.derivative(t) - dec.B));
    } catch (const NearSingularError&) {
      r_gauge = std::numeric_limits<double>::infinity();
    }
  }
  const double scaled = tol * std::max(1.0, sup_phi);
  report.add("phi_reconstruction", r_phi, scaled, grid_desc, "max ||Phi(t) - P(t) exp(Bt)||");
  report.add("p_periodicity", r_periodic, scaled, grid_desc, "max ||P(t + T_eff) - P(t)||");
  report.add("gauge_constancy", r_gauge, tol, grid_desc, "max ||P^-1 A P - P^-1 P' - B||");
  report.add("p_initial_identity", max_norm(dec.P.value(0.0) - SquareMatrix::identity(n)), 0.0, "t = 0");

  // Holonomy: spectrum of Phi(T_eff) against exp(lambda_i T_eff).
  const ComplexSpectrum mu = eigenvalues(phi.eval_matrix(t_eff));
  const ComplexSpectrum lambda = eigenvalues(dec.B);
  std::vector<bool> used(mu.eigenvalues.size(), false);
  double r_holonomy = 0.0;
  for (auto l : lambda.eigenvalues) {
    const std::complex<double> target = std::exp(l * t_eff);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < mu.eigenvalues.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(mu.eigenvalues[k] - target);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    used[best] = true;
    r_holonomy = std::max(r_holonomy, best_d / std::max(std::abs(target), 1e-300));
  }
  report.add("holonomy", r_holonomy, 1e-6, "spectrum of Phi(T_eff)", "relative, multipliers vs exp(lambda T_eff)");

  report.data["period"] = dec.period;
  report.data["effective_period"] = t_eff;
  report.data["doubled"] = dec.doubled;
  report.data["sup_phi"] = sup_phi;
  report.data["tolerance"] = tol;
  if (dec.doubled) report.warnings.push_back("monodromy has no real logarithm; B extracted from Phi(2T) (period doubling)");
  return report;
}

double liouville_residual(const Trajectory& phi, const TimeMatrix& a, const IntegratorOptions& opts) {
  const double t0 = phi.t_begin();
  const double t1 = phi.t_end();
  const std::vector<double> grid = uniform_grid(t0, t1, 100);
  VectorRhs trace_rhs = [&a](double t, std::span<const double>, std::span<double> dx) { dx[0] = a.value(t).trace(); };
  IntegratorOptions o = with_stops(opts, grid);
  const Trajectory integral = integrate_vector(trace_rhs, {0.0}, {t0, t1}, o);
  double worst = 0.0;
  for (double t : grid) {
    const double expected = std::exp(integral.eval(t)[0]);
    const double det = determinant(phi.eval_matrix(t));
    worst = std::max(worst, std::abs(det - expected) / expected);
  }
  return worst;
}

}  // namespace fg
