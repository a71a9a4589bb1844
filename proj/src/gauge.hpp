#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "report.hpp"
#include "time_matrix.hpp"

namespace fg {

/// Invertible change of variables x = P(t) y.
///
/// On construction det P is sampled on a uniform grid over the domain (when
/// the domain is bounded) and must stay above 1e-10 times the running max of
/// ||P||^n; otherwise NearSingularError is thrown with the offending time.
class GaugeTransform {
 public:
  static constexpr double kSingularRatio = 1e-10;

  GaugeTransform() = default;
  explicit GaugeTransform(TimeMatrix p, std::size_t check_points = 512);
  GaugeTransform(TimeMatrix p, Interval domain, std::size_t check_points = 512);

  static GaugeTransform identity(std::size_t n);

  const TimeMatrix& matrix() const { return p_; }
  std::size_t size() const { return p_.size(); }
  Interval domain() const { return p_.domain(); }

  SquareMatrix value(double t) const { return p_.value(t); }
  SquareMatrix derivative(double t) const { return p_.derivative(t); }
  /// Throws NearSingularError carrying t.
  SquareMatrix inverse(double t) const;

 private:
  TimeMatrix p_;
};

/// N(x, t), one expression or callable per component.
class NonlinearTerm {
 public:
  using Field = std::function<std::vector<double>(double t, std::span<const double> x)>;

  NonlinearTerm() = default;
  /// Components over t, x1..xn and parameters (bound here). With `autonomous`
  /// set, a free `t` is rejected.
  static NonlinearTerm parse(const std::vector<std::string>& components, const ParamMap& params = {},
                             bool autonomous = false);
  static NonlinearTerm from_expressions(std::vector<Expression> components, bool autonomous = false);
  static NonlinearTerm from_field(std::size_t n, Field field, bool autonomous = false);
  static NonlinearTerm zero(std::size_t n);

  std::size_t size() const { return n_; }
  bool autonomous() const { return autonomous_; }
  bool has_expressions() const { return !exprs_.empty(); }
  const std::vector<Expression>& expressions() const { return exprs_; }

  std::vector<double> operator()(double t, std::span<const double> x) const;

 private:
  std::size_t n_ = 0;
  bool autonomous_ = false;
  std::vector<Expression> exprs_;
  Field field_;
};

/// A_hat = P^-1 A P - P^-1 P', evaluated exactly at any t of the common
/// domain. When that domain is bounded it is scanned on `grid_points` times
/// first so a singular P surfaces here, with its time.
TimeMatrix push_linear(const TimeMatrix& a, const GaugeTransform& p, std::size_t grid_points = 512);

struct TransportSolution {
  GaugeTransform gauge;
  /// Part of the requested span on which P is kept.
  Interval domain{};
  bool trimmed = false;
  std::vector<std::string> warnings;
};

/// Solves P' = A P - P B, P(span[0]) = p0. The domain is trimmed at the first
/// node where |det P| < 1e-10 * running max ||P||^n, or at the last good time
/// when the integrator fails part way.
TransportSolution solve_transport(const TimeMatrix& a, const SquareMatrix& b, const SquareMatrix& p0,
                                  std::array<double, 2> span, const IntegratorOptions& opts = {});

/// max over `grid` of ||P' - A P + P B||.
double transport_residual(const TimeMatrix& a, const GaugeTransform& p, const SquareMatrix& b,
                          const std::vector<double>& grid);

/// max over `grid` of ||A_hat(t) - B||.
double constancy_deviation(const TimeMatrix& a_hat, const SquareMatrix& b, const std::vector<double>& grid);

/// F(y, t) = P^-1(t) N(P(t) y, t).
NonlinearTerm push_nonlinear(const NonlinearTerm& n, const GaugeTransform& p);

struct EquivarianceOptions {
  std::uint64_t seed = 20240601;
  /// Random states per group sample, drawn uniformly from [-2, 2]^n.
  std::size_t points_per_sample = 25;
  /// Times drawn uniformly from [0, time_range].
  double time_range = 6.283185307179586;
};

/// max over samples g and random (t, x) of ||N(g x, t) - g N(x, t)||.
Report equivariance_check(const NonlinearTerm& n, const std::vector<SquareMatrix>& group_samples, double tol,
                          const EquivarianceOptions& opts = {});

/// `count` random rotations of R^n (orthogonal, det +1).
std::vector<SquareMatrix> random_rotations(std::size_t n, std::size_t count, std::uint64_t seed);

/// max over `grid` of ||y' - B y|| with y = P^-1 x and y' a five-point
/// difference of the dense trajectory.
double covariant_derivative_residual(const Trajectory& x, const GaugeTransform& p, const SquareMatrix& b,
                                     const std::vector<double>& grid);

/// det P0 exp(int_t0^t tr A - tr B), the a priori value of det P(t) along the
/// transport equation.
double predicted_determinant(const TimeMatrix& a, const SquareMatrix& b, const SquareMatrix& p0,
                             std::array<double, 2> span, const IntegratorOptions& opts = {});

}  // namespace fg
