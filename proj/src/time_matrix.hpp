#pragma once

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "expr.hpp"
#include "linalg.hpp"
#include "ode.hpp"

namespace fg {

using Interval = std::array<double, 2>;

inline constexpr Interval kWholeLine{-std::numeric_limits<double>::infinity(),
                                     std::numeric_limits<double>::infinity()};

/// n x n matrix-valued function of time.
///
/// ClosedForm holds one expression per entry (parameters already bound, only
/// `t` free) and differentiates symbolically. Sampled wraps a matrix
/// trajectory and uses the Hermite derivative. Function wraps callables; its
/// derivative falls back to a five-point finite difference when none is given.
class TimeMatrix {
 public:
  enum class Kind { ClosedForm, Sampled, Function };
  using ValueFn = std::function<SquareMatrix(double)>;

  TimeMatrix() = default;

  static TimeMatrix closed_form(std::size_t n, std::vector<Expression> entries, Interval domain = kWholeLine);
  /// Parses `entries` (row-major) and binds `params`.
  static TimeMatrix parse(std::size_t n, const std::vector<std::string>& entries, const ParamMap& params = {},
                          Interval domain = kWholeLine);
  static TimeMatrix constant(const SquareMatrix& m);
  static TimeMatrix sampled(Trajectory matrix_trajectory);
  static TimeMatrix function(std::size_t n, ValueFn value, ValueFn derivative = nullptr, Interval domain = kWholeLine);

  Kind kind() const { return impl_->kind; }
  std::size_t size() const { return impl_->n; }
  Interval domain() const { return impl_->domain; }
  bool contains(double t) const;

  SquareMatrix value(double t) const;
  SquareMatrix derivative(double t) const;

  /// Entry expressions (ClosedForm only).
  const std::vector<Expression>& entries() const;
  const std::vector<Expression>& derivative_entries() const;
  const Trajectory& trajectory() const;

  /// Same function restricted to a sub-interval.
  TimeMatrix restricted(Interval domain) const;

 private:
  struct Impl {
    Kind kind = Kind::Function;
    std::size_t n = 0;
    Interval domain = kWholeLine;
    std::vector<Expression> entries;
    std::vector<Expression> d_entries;
    std::shared_ptr<const Trajectory> traj;
    ValueFn value;
    ValueFn derivative;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Product P1(t) P2(t) with the product rule for the derivative.
TimeMatrix multiply(const TimeMatrix& a, const TimeMatrix& b);
/// Pointwise inverse with derivative -P^-1 P' P^-1.
TimeMatrix pointwise_inverse(const TimeMatrix& p);
/// 2n x 2n block matrix [[a, b], [c, d]].
TimeMatrix block(const TimeMatrix& a, const TimeMatrix& b, const TimeMatrix& c, const TimeMatrix& d);

Interval intersect(Interval a, Interval b);
/// `count` equally spaced points covering [lo, hi] including both ends.
std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

/// Fourth-order finite-difference derivative of a vector-valued function,
/// one-sided near the ends of [lo, hi].
std::vector<double> fd_derivative(const std::function<std::vector<double>(double)>& fn, double t, Interval domain,
                                  double h);

}  // namespace fg
