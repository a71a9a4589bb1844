#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "linalg.hpp"

namespace fg {

struct IntegratorOptions {
  enum class Method { RK45, RK4 };

  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
  /// Step length for Method::RK4.
  double step = 1e-2;
  std::size_t max_steps = 2'000'000;
  Method method = Method::RK45;
  /// Times inside the span that must appear as trajectory nodes.
  std::vector<double> stops;
  /// Optional scalar functional; sign changes between nodes are located and
  /// recorded as events.
  std::function<double(double, std::span<const double>)> event;
  /// Stop right after the step in which the first event is found.
  bool terminate_on_event = false;

  void validate() const;
};

/// Time-ordered samples with stored derivatives.
///
/// Dense output is cubic Hermite on the node values and derivatives. Steps
/// taken by the embedded method also store the state at each step midpoint,
/// which lifts the interpolant to the quartic continuous extension of the
/// Dormand-Prince pair.
class Trajectory {
 public:
  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
  };

  Trajectory() = default;
  /// `states` and `derivs` are flattened, `dimension` values per node.
  /// `midpoints` is empty or holds `dimension` values per step.
  Trajectory(std::vector<double> times, std::vector<double> states, std::vector<double> derivs,
             std::size_t dimension, std::size_t matrix_n = 0, std::vector<double> midpoints = {});

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t dimension() const noexcept { return dim_; }
  bool is_matrix() const noexcept { return matrix_n_ > 0; }
  std::size_t matrix_size() const noexcept { return matrix_n_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const std::vector<double>& times() const noexcept { return times_; }
  std::span<const double> state(std::size_t i) const { return {states_.data() + i * dim_, dim_}; }
  std::span<const double> derivative(std::size_t i) const { return {derivs_.data() + i * dim_, dim_}; }

  std::vector<double> eval(double t) const;
  std::vector<double> eval_derivative(double t) const;
  SquareMatrix eval_matrix(double t) const;
  SquareMatrix eval_matrix_derivative(double t) const;
  bool contains(double t) const;
  bool has_midpoints() const noexcept { return !mids_.empty(); }
  /// Nodes first..last inclusive.
  Trajectory slice(std::size_t first, std::size_t last) const;

  const std::vector<double>& events() const noexcept { return events_; }
  const Stats& stats() const noexcept { return stats_; }

 private:
  friend class Integrator;
  friend Trajectory integrate_vector(const std::function<void(double, std::span<const double>, std::span<double>)>&,
                                     std::vector<double>, std::array<double, 2>, const struct IntegratorOptions&);
  friend Trajectory integrate_matrix(const std::function<SquareMatrix(double, const SquareMatrix&)>&,
                                     const SquareMatrix&, std::array<double, 2>, const struct IntegratorOptions&);
  std::size_t locate(double t) const;
  void hermite(double t, bool derivative, std::span<double> out) const;

  std::vector<double> times_;
  std::vector<double> states_;
  std::vector<double> derivs_;
  std::vector<double> mids_;
  std::size_t dim_ = 0;
  std::size_t matrix_n_ = 0;
  std::vector<double> events_;
  Stats stats_;
};

/// dx = f(t, x)
using VectorRhs = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;
using MatrixRhs = std::function<SquareMatrix(double t, const SquareMatrix& m)>;

/// Integrates from span[0] to span[1]; span[1] < span[0] integrates backwards.
/// The trajectory is always stored in increasing time.
Trajectory integrate_vector(const VectorRhs& rhs, std::vector<double> x0, std::array<double, 2> span,
                            const IntegratorOptions& opts = {});
Trajectory integrate_matrix(const MatrixRhs& rhs, const SquareMatrix& m0, std::array<double, 2> span,
                            const IntegratorOptions& opts = {});

}  // namespace fg
