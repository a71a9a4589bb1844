#pragma once

#include "linalg.hpp"
#include "ode.hpp"
#include "report.hpp"
#include "time_matrix.hpp"

namespace fg {

/// Integrator settings used by the Floquet routines unless the caller
/// overrides them. Tighter than the generic defaults: the decomposition is
/// checked against absolute residuals while Phi may grow by orders of
/// magnitude over a period.
IntegratorOptions floquet_integrator_defaults();

struct FloquetOptions {
  IntegratorOptions integrator = floquet_integrator_defaults();
  /// Intervals of the uniform grid on which P is stored.
  std::size_t p_intervals = 512;
  std::size_t periodicity_samples = 20;
  double periodicity_tol = 1e-8;
};

struct FloquetDecomposition {
  SquareMatrix B;
  /// Sampled on [0, effective_period()].
  TimeMatrix P;
  /// Phi(T) for the declared period.
  SquareMatrix monodromy;
  /// Phi(T_eff); equals `monodromy` unless doubled.
  SquareMatrix monodromy_effective;
  double period = 0.0;
  bool doubled = false;
  /// Spectrum of `monodromy`.
  ComplexSpectrum multipliers;
  /// Fundamental matrix on [0, T_eff].
  Trajectory phi;

  double effective_period() const { return doubled ? 2.0 * period : period; }
};

/// Phi' = A Phi, Phi(0) = I on [0, t_end].
Trajectory fundamental_matrix(const TimeMatrix& a, double t_end, const IntegratorOptions& opts = floquet_integrator_defaults());
SquareMatrix monodromy(const TimeMatrix& a, double period, const IntegratorOptions& opts = floquet_integrator_defaults());

/// Throws Error(Aperiodic) when max ||A(t+T) - A(t)|| exceeds tol * max(1, ||A(t)||) at
/// `samples` points of [0, T).
void check_periodic(const TimeMatrix& a, double period, std::size_t samples, double tol);

FloquetDecomposition floquet_decompose(const TimeMatrix& a, double period, const FloquetOptions& opts = {});

/// Residuals of the decomposition on a uniform grid of `grid_points` times in
/// [0, T_eff]:
///  phi_reconstruction   max ||Phi(t) - P(t) exp(Bt)||
///  p_periodicity        max ||P(t + T_eff) - P(t)||
///  gauge_constancy      max ||P^-1 A P - P^-1 P' - B||
///  holonomy             spectrum of Phi(T_eff) against exp(lambda_i(B) T_eff), relative
/// The first two are compared against tol * max(1, sup ||Phi||).
Report verify_decomposition(const FloquetDecomposition& dec, const TimeMatrix& a, double tol,
                            std::size_t grid_points = 100, const IntegratorOptions& opts = floquet_integrator_defaults());

/// max over the trajectory nodes of |det Phi(t) - exp(int_0^t tr A)| / exp(int_0^t tr A),
/// the integral taken by a separate scalar integration.
double liouville_residual(const Trajectory& phi, const TimeMatrix& a, const IntegratorOptions& opts = floquet_integrator_defaults());

}  // namespace fg
