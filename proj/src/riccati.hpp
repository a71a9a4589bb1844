#pragma once

#include <string>
#include <vector>

#include "report.hpp"
#include "time_matrix.hpp"

namespace fg {

/// y' = f(t) + g(t) y + h(t) y^2, y(t0) = y0 with t0 the start of the span.
/// `alpha` is the free diagonal shift of the linearization.
struct ScalarRiccati {
  Expression f;
  Expression g;
  Expression h;
  Expression alpha = Expression::number(0.0);
  double y0 = 0.0;

  static ScalarRiccati parse(const std::string& f, const std::string& g, const std::string& h, double y0,
                             const ParamMap& params = {}, const std::string& alpha = "0");
  /// Same equation with another alpha.
  ScalarRiccati with_alpha(Expression a) const;
};

/// Y' = M11 Y + M12 - Y M21 Y - Y M22, Y(t0) = Y0.
struct MatrixRiccati {
  TimeMatrix m11;
  TimeMatrix m12;
  TimeMatrix m21;
  TimeMatrix m22;
  SquareMatrix y0;

  std::size_t size() const { return y0.size(); }
};

/// Constant-coefficient scalar Riccati read back from a 2x2 matrix.
struct RiccatiCoefficients {
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
};

/// [[g + alpha, f], [-h, alpha]]. Throws Error(Domain) when h vanishes or
/// changes sign on a `grid_points` grid over `working`.
TimeMatrix linearize_scalar(const ScalarRiccati& r, Interval working, std::size_t grid_points = 257);
/// [[M11, M12], [M21, M22]].
TimeMatrix linearize_matrix(const MatrixRiccati& r);

/// Inverse of the scalar linearization for a constant matrix:
/// (f, g, h) = (B12, B11 - B22, -B21).
RiccatiCoefficients readback(const SquareMatrix& b);

struct RiccatiOptions {
  IntegratorOptions integrator = default_integrator();
  /// Keep integrating the linear system through poles instead of stopping at
  /// the first one.
  bool continue_through_poles = false;
  /// Initial data of the linear system is (c Y0; c I).
  double projective_scale = 1.0;

  static IntegratorOptions default_integrator();
};

/// Riccati solution carried by the linear system X = (X1; X2), Y = X1 X2^-1.
class RiccatiSolution {
 public:
  RiccatiSolution() = default;
  RiccatiSolution(Trajectory linear, std::size_t n, Interval domain, std::vector<double> poles, bool stopped);

  std::size_t size() const { return n_; }
  const Trajectory& linear() const { return linear_; }
  /// Times where the denominator (v or det X2) crossed zero, increasing. A
  /// det X2 zero of even multiplicity counts only if a node falls below the
  /// 1e-10 relative threshold.
  const std::vector<double>& poles() const { return poles_; }
  /// Interval on which Y is reported. Ends at the first pole unless the
  /// solve continued through poles.
  Interval domain() const { return domain_; }
  bool stopped_at_pole() const { return stopped_; }
  /// Pole-free sub-intervals of the domain.
  std::vector<Interval> pieces() const;
  bool near_pole(double t, double guard) const;

  double value(double t) const;
  double derivative(double t) const;
  SquareMatrix matrix_value(double t) const;
  SquareMatrix matrix_derivative(double t) const;

  std::vector<std::string> warnings;

 private:
  void split(double t, SquareMatrix& x1, SquareMatrix& x2, bool derivative) const;

  Trajectory linear_;
  std::size_t n_ = 0;
  Interval domain_{};
  std::vector<double> poles_;
  bool stopped_ = false;
};

RiccatiSolution solve_scalar(const ScalarRiccati& r, std::array<double, 2> span, const RiccatiOptions& opts = {});
RiccatiSolution solve_matrix(const MatrixRiccati& r, std::array<double, 2> span, const RiccatiOptions& opts = {});

/// Direct integration of y' = f + g y + h y^2, the independent path used to
/// cross-check the linearization.
Trajectory integrate_riccati_direct(const ScalarRiccati& r, std::array<double, 2> span,
                                    const IntegratorOptions& opts = RiccatiOptions::default_integrator());

/// max |y' - f - g y - h y^2| over grid points farther than `guard` from a pole.
double riccati_residual(const ScalarRiccati& r, const RiccatiSolution& sol, const std::vector<double>& grid,
                        double guard = 0.05);
/// max ||Y' - M11 Y - M12 + Y M21 Y + Y M22|| over guarded grid points.
double riccati_residual(const MatrixRiccati& r, const RiccatiSolution& sol, const std::vector<double>& grid,
                        double guard = 0.05);

/// Solves once per alpha and reports max |y_a(t) - y_b(t)| against the first
/// alpha on a uniform grid, away from poles. Passes at `tol`.
Report alpha_invariance(const ScalarRiccati& r, const std::vector<Expression>& alphas, std::array<double, 2> span,
                        double tol = 1e-6, std::size_t grid_points = 201, double guard = 0.05,
                        const RiccatiOptions& opts = {});

}  // namespace fg
