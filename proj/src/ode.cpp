#include "ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace fg {

void IntegratorOptions::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "integrator tolerances must be positive");
  if (!(max_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_step must be positive");
  if (method == Method::RK4 && !(step > 0.0 && std::isfinite(step)))
    throw Error(ErrorCode::InvalidArgument, "fixed step must be positive and finite");
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(std::vector<double> times, std::vector<double> states, std::vector<double> derivs,
                       std::size_t dimension, std::size_t matrix_n, std::vector<double> midpoints)
    : times_(std::move(times)),
      states_(std::move(states)),
      derivs_(std::move(derivs)),
      mids_(std::move(midpoints)),
      dim_(dimension),
      matrix_n_(matrix_n) {
  if (times_.empty()) throw Error(ErrorCode::InvalidArgument, "trajectory needs at least one node");
  if (states_.size() != times_.size() * dim_ || derivs_.size() != states_.size())
    throw Error(ErrorCode::Dimension, "trajectory state/derivative sizes do not match node count");
  if (!mids_.empty() && mids_.size() != (times_.size() - 1) * dim_)
    throw Error(ErrorCode::Dimension, "trajectory midpoint count does not match step count");
  if (matrix_n_ && matrix_n_ * matrix_n_ != dim_) throw Error(ErrorCode::Dimension, "matrix trajectory dimension mismatch");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw Error(ErrorCode::InvalidArgument, "trajectory times must be strictly increasing");
}

Trajectory Trajectory::slice(std::size_t first, std::size_t last) const {
  if (first > last || last >= size()) throw Error(ErrorCode::OutOfRange, "trajectory slice out of range");
  auto cut = [this](const std::vector<double>& v, std::size_t a, std::size_t b) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(a * dim_),
                               v.begin() + static_cast<std::ptrdiff_t>(b * dim_));
  };
  Trajectory out(std::vector<double>(times_.begin() + static_cast<std::ptrdiff_t>(first),
                                     times_.begin() + static_cast<std::ptrdiff_t>(last + 1)),
                 cut(states_, first, last + 1), cut(derivs_, first, last + 1), dim_, matrix_n_,
                 mids_.empty() ? std::vector<double>{} : cut(mids_, first, last));
  for (double e : events_)
    if (e >= out.t_begin() && e <= out.t_end()) out.events_.push_back(e);
  out.stats_ = stats_;
  return out;
}

bool Trajectory::contains(double t) const {
  const double slack = 1e-12 * std::max({1.0, std::abs(t_begin()), std::abs(t_end())});
  return t >= t_begin() - slack && t <= t_end() + slack;
}

std::size_t Trajectory::locate(double t) const {
  if (!contains(t)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "time " << t << " outside trajectory span [" << t_begin() << ", " << t_end() << "]";
    throw Error(ErrorCode::OutOfRange, msg.str());
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(i, times_.size() - 1);
}

void Trajectory::hermite(double t, bool derivative, std::span<double> out) const {
  const std::size_t i = locate(t);
  if (times_[i] == t || i + 1 == times_.size() || size() == 1) {
    const auto& src = derivative ? derivs_ : states_;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(i * dim_), dim_, out.begin());
    return;
  }
  const double t0 = times_[i];
  const double h = times_[i + 1] - t0;
  const double s = std::clamp((t - t0) / h, 0.0, 1.0);
  const double* y0 = states_.data() + i * dim_;
  const double* y1 = y0 + dim_;
  const double* d0 = derivs_.data() + i * dim_;
  const double* d1 = d0 + dim_;
  const double s2 = s * s;
  const double s3 = s2 * s;
  // Quartic correction c s^2 (1 - s)^2 with c fixed by the stored midpoint.
  const double* ym = mids_.empty() ? nullptr : mids_.data() + i * dim_;
  auto correction = [&](std::size_t k) {
    const double hermite_mid = 0.5 * (y0[k] + y1[k]) + 0.125 * h * (d0[k] - d1[k]);
    return 16.0 * (ym[k] - hermite_mid);
  };
  if (!derivative) {
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    const double q = s2 * (1 - s) * (1 - s);
    for (std::size_t k = 0; k < dim_; ++k) {
      out[k] = h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k];
      if (ym) out[k] += q * correction(k);
    }
  } else {
    const double g00 = (6 * s2 - 6 * s) / h;
    const double g10 = 3 * s2 - 4 * s + 1;
    const double g01 = (-6 * s2 + 6 * s) / h;
    const double g11 = 3 * s2 - 2 * s;
    const double dq = 2 * s * (1 - s) * (1 - 2 * s) / h;
    for (std::size_t k = 0; k < dim_; ++k) {
      out[k] = g00 * y0[k] + g10 * d0[k] + g01 * y1[k] + g11 * d1[k];
      if (ym) out[k] += dq * correction(k);
    }
  }
}

std::vector<double> Trajectory::eval(double t) const {
  std::vector<double> out(dim_);
  hermite(t, false, out);
  return out;
}

std::vector<double> Trajectory::eval_derivative(double t) const {
  std::vector<double> out(dim_);
  hermite(t, true, out);
  return out;
}

SquareMatrix Trajectory::eval_matrix(double t) const {
  if (!matrix_n_) throw Error(ErrorCode::Dimension, "trajectory does not hold a matrix state");
  return SquareMatrix(matrix_n_, eval(t));
}

SquareMatrix Trajectory::eval_matrix_derivative(double t) const {
  if (!matrix_n_) throw Error(ErrorCode::Dimension, "trajectory does not hold a matrix state");
  return SquareMatrix(matrix_n_, eval_derivative(t));
}

// ---------------------------------------------------------------------------

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// Continuous extension of the pair (Hairer, Norsett, Wanner).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

bool finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

/// Forward-in-time integration engine; reversal is handled by the caller
/// through the substitution s = -t.
class Integrator {
 public:
  Integrator(const VectorRhs& rhs, const IntegratorOptions& opts, double sign)
      : rhs_(rhs), opts_(opts), sign_(sign) {}

  Trajectory run(std::vector<double> x0, double t0, double t1) {
    const std::size_t n = x0.size();
    n_ = n;
    std::vector<double> stops;
    for (double s : opts_.stops) {
      const double u = sign_ * s;
      if (u > t0 && u < t1) stops.push_back(u);
    }
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    stops.push_back(t1);

    std::vector<double> times{t0};
    std::vector<double> states(x0);
    std::vector<double> derivs(n);
    std::vector<double> mids;
    std::vector<double> events;

    double t = t0;
    std::vector<double> x = std::move(x0);
    std::vector<double> k1(n);
    f(t, x, k1);
    if (!finite(x) || !finite(k1))
      throw IntegrationError(IntegrationError::Kind::NonFinite, t * sign_, "non-finite initial state or derivative");
    std::copy(k1.begin(), k1.end(), derivs.begin());

    const bool adaptive = opts_.method == IntegratorOptions::Method::RK45;
    double h = adaptive ? initial_step(t, x, k1, t1) : std::min(opts_.step, opts_.max_step);
    std::size_t stop_index = 0;
    bool last_rejected = false;
    bool last_nonfinite = false;
    std::vector<double> x_new(n), k_new(n), err(n);
    std::vector<std::vector<double>> k(7, std::vector<double>(n));
    double g_prev = event_value(t, x);

    while (t < t1) {
      if (stats_.accepted + stats_.rejected >= opts_.max_steps)
        throw IntegrationError(IntegrationError::Kind::MaxSteps, t * sign_,
                               "step limit reached at t = " + fmt(t * sign_));
      while (stops[stop_index] <= t) ++stop_index;
      const double target = stops[stop_index];
      h = std::min(h, opts_.max_step);
      const double h_free = h;
      bool hit = false;
      if (t + h >= target - 1e-14 * std::max(1.0, std::abs(target))) {
        h = target - t;
        hit = true;
      }
      const double hmin = 1e-14 * std::max(1.0, std::abs(t));
      if (h < hmin && !hit) {
        throw IntegrationError(last_nonfinite ? IntegrationError::Kind::NonFinite : IntegrationError::Kind::StepUnderflow,
                               t * sign_,
                               std::string(last_nonfinite ? "non-finite right-hand side" : "step size underflow") +
                                   " near t = " + fmt(t * sign_) + "; last good time " + fmt(t * sign_));
      }

      double error_norm = 0.0;
      bool ok = true;
      if (adaptive) {
        ok = dopri_step(t, h, x, k1, k, x_new, err);
        if (ok) error_norm = norm(err, x, x_new);
        ok = ok && std::isfinite(error_norm);
      } else {
        ok = rk4_step(t, h, x, k1, k, x_new);
      }
      if (!ok) {
        ++stats_.rejected;
        last_nonfinite = true;
        last_rejected = true;
        h *= 0.2;
        continue;
      }
      if (adaptive && error_norm > 1.0) {
        ++stats_.rejected;
        last_nonfinite = false;
        last_rejected = true;
        h *= std::max(0.2, 0.9 * std::pow(error_norm, -0.2));
        continue;
      }

      const double t_new = hit ? target : t + h;
      if (adaptive) {
        k_new = k[6];  // FSAL
      } else {
        f(t_new, x_new, k_new);
        if (!finite(k_new)) {
          throw IntegrationError(IntegrationError::Kind::NonFinite, t * sign_,
                                 "non-finite right-hand side at t = " + fmt(t_new * sign_));
        }
      }
      std::vector<double> x_mid;
      if (adaptive) x_mid = midpoint(h, x, x_new, k);
      if (opts_.event) {
        const double g_new = event_value(t_new, x_new);
        if ((g_prev < 0.0 && g_new >= 0.0) || (g_prev > 0.0 && g_new <= 0.0)) {
          events.push_back(locate_event(t, x, k1, t_new, x_new, k_new, x_mid, g_prev));
        }
        g_prev = g_new;
      }

      ++stats_.accepted;
      mids.insert(mids.end(), x_mid.begin(), x_mid.end());
      times.push_back(t_new);
      states.insert(states.end(), x_new.begin(), x_new.end());
      derivs.insert(derivs.end(), k_new.begin(), k_new.end());
      t = t_new;
      x.swap(x_new);
      k1.swap(k_new);
      if (opts_.terminate_on_event && !events.empty()) break;

      if (adaptive) {
        double factor = error_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(error_norm, -0.2), 0.2, 5.0);
        if (last_rejected) factor = std::min(factor, 1.0);
        h = hit ? std::min(h_free, h * factor) : h * factor;
      } else {
        h = std::min(opts_.step, opts_.max_step);
      }
      last_rejected = false;
      last_nonfinite = false;
    }

    Trajectory traj;
    traj.times_ = std::move(times);
    traj.states_ = std::move(states);
    traj.derivs_ = std::move(derivs);
    traj.mids_ = std::move(mids);
    traj.dim_ = n;
    traj.events_ = std::move(events);
    traj.stats_ = stats_;
    return traj;
  }

 private:
  const VectorRhs& rhs_;
  const IntegratorOptions& opts_;
  double sign_;
  std::size_t n_ = 0;
  Trajectory::Stats stats_;

  // Right-hand side in the integration variable u = sign * t.
  void f(double u, std::span<const double> x, std::span<double> dx) {
    ++stats_.rhs_evals;
    rhs_(sign_ * u, x, dx);
    if (sign_ < 0)
      for (double& v : dx) v = -v;
  }

  double event_value(double u, std::span<const double> x) const {
    return opts_.event ? opts_.event(sign_ * u, x) : 0.0;
  }

  double norm(const std::vector<double>& e, const std::vector<double>& x0, const std::vector<double>& x1) const {
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double sc = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(x0[i]), std::abs(x1[i]));
      s += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(s / static_cast<double>(std::max<std::size_t>(1, e.size())));
  }

  double initial_step(double t0, const std::vector<double>& x0, const std::vector<double>& f0, double t1) {
    const std::size_t n = x0.size();
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opts_.abs_tol + opts_.rel_tol * std::abs(x0[i]);
      d0 += (x0[i] / sc) * (x0[i] / sc);
      d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, t1 - t0, opts_.max_step});
    std::vector<double> x1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) x1[i] = x0[i] + h0 * f0[i];
    f(t0 + h0, x1, f1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opts_.abs_tol + opts_.rel_tol * std::abs(x0[i]);
      d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = std::sqrt(d2 / n) / h0;
    if (!std::isfinite(d2)) return h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min(100 * h0, h1);
  }

  bool dopri_step(double t, double h, const std::vector<double>& x, const std::vector<double>& k1,
                  std::vector<std::vector<double>>& k, std::vector<double>& x_new, std::vector<double>& err) {
    const std::size_t n = x.size();
    std::vector<double> tmp(n);
    auto stage = [&](double c, auto&& combine, std::vector<double>& out) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * combine(i);
      f(t + c * h, tmp, out);
      return finite(out);
    };
    k[0] = k1;
    if (!stage(c2, [&](std::size_t i) { return a21 * k[0][i]; }, k[1])) return false;
    if (!stage(c3, [&](std::size_t i) { return a31 * k[0][i] + a32 * k[1][i]; }, k[2])) return false;
    if (!stage(c4, [&](std::size_t i) { return a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]; }, k[3])) return false;
    if (!stage(c5, [&](std::size_t i) { return a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]; }, k[4]))
      return false;
    if (!stage(1.0,
               [&](std::size_t i) {
                 return a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i];
               },
               k[5]))
      return false;
    for (std::size_t i = 0; i < n; ++i)
      x_new[i] = x[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] + a76 * k[5][i]);
    if (!finite(x_new)) return false;
    f(t + h, x_new, k[6]);
    if (!finite(k[6])) return false;
    for (std::size_t i = 0; i < n; ++i)
      err[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
    return true;
  }

  // State at t + h/2 from the continuous extension of the accepted step.
  static std::vector<double> midpoint(double h, const std::vector<double>& x, const std::vector<double>& x_new,
                                      const std::vector<std::vector<double>>& k) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = x_new[i] - x[i];
      const double r3 = h * k[0][i] - diff;
      const double r4 = diff - h * k[6][i] - r3;
      const double r5 = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
      out[i] = x[i] + 0.5 * (diff + 0.5 * (r3 + 0.5 * (r4 + 0.5 * r5)));
    }
    return out;
  }

  bool rk4_step(double t, double h, const std::vector<double>& x, const std::vector<double>& k1,
                std::vector<std::vector<double>>& k, std::vector<double>& x_new) {
    const std::size_t n = x.size();
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    f(t + 0.5 * h, tmp, k[1]);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k[1][i];
    f(t + 0.5 * h, tmp, k[2]);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k[2][i];
    f(t + h, tmp, k[3]);
    for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + h / 6.0 * (k1[i] + 2 * k[1][i] + 2 * k[2][i] + k[3][i]);
    return finite(x_new);
  }

  // Root of the event functional on the dense output of one step.
  double locate_event(double ta, const std::vector<double>& xa, const std::vector<double>& da, double tb,
                      const std::vector<double>& xb, const std::vector<double>& db, const std::vector<double>& xm,
                      double ga) {
    const std::size_t n = xa.size();
    const double h = tb - ta;
    std::vector<double> xs(n);
    auto g_at = [&](double u) {
      const double s = (u - ta) / h;
      const double s2 = s * s, s3 = s2 * s;
      const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
      const double q = s2 * (1 - s) * (1 - s);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = h00 * xa[i] + h10 * h * da[i] + h01 * xb[i] + h11 * h * db[i];
        if (!xm.empty()) xs[i] += q * 16.0 * (xm[i] - 0.5 * (xa[i] + xb[i]) - 0.125 * h * (da[i] - db[i]));
      }
      return event_value(u, xs);
    };
    double lo = ta, hi = tb, glo = ga;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g_at(mid);
      if (gm == 0.0) return sign_ * mid;
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return sign_ * 0.5 * (lo + hi);
  }
};

Trajectory integrate_vector(const VectorRhs& rhs, std::vector<double> x0, std::array<double, 2> span,
                            const IntegratorOptions& opts) {
  opts.validate();
  if (x0.empty()) throw Error(ErrorCode::Dimension, "empty initial state");
  if (!std::isfinite(span[0]) || !std::isfinite(span[1]) || span[0] == span[1])
    throw Error(ErrorCode::InvalidArgument, "integration span must be finite with distinct endpoints");
  const double sign = span[1] > span[0] ? 1.0 : -1.0;
  Integrator engine(rhs, opts, sign);
  Trajectory traj = engine.run(std::move(x0), sign * span[0], sign * span[1]);
  if (sign > 0) return traj;

  // Map u = -t back to increasing t.
  const std::size_t m = traj.size();
  const std::size_t d = traj.dimension();
  std::vector<double> times(m), states(m * d), derivs(m * d);
  std::vector<double> mids;
  if (traj.has_midpoints()) {
    mids.resize((m - 1) * d);
    for (std::size_t i = 0; i + 1 < m; ++i)
      std::copy_n(traj.mids_.begin() + static_cast<std::ptrdiff_t>((m - 2 - i) * d), d,
                  mids.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = m - 1 - i;
    times[i] = -traj.times()[j];
    auto s = traj.state(j);
    auto ds = traj.derivative(j);
    for (std::size_t k = 0; k < d; ++k) {
      states[i * d + k] = s[k];
      derivs[i * d + k] = -ds[k];
    }
  }
  Trajectory out(std::move(times), std::move(states), std::move(derivs), d, 0, std::move(mids));
  std::vector<double> events = traj.events();
  std::reverse(events.begin(), events.end());
  out.events_ = std::move(events);
  out.stats_ = traj.stats();
  return out;
}

Trajectory integrate_matrix(const MatrixRhs& rhs, const SquareMatrix& m0, std::array<double, 2> span,
                            const IntegratorOptions& opts) {
  const std::size_t n = m0.size();
  VectorRhs flat = [&rhs, n](double t, std::span<const double> x, std::span<double> dx) {
    const SquareMatrix m(n, std::vector<double>(x.begin(), x.end()));
    const SquareMatrix d = rhs(t, m);
    if (d.size() != n) throw Error(ErrorCode::Dimension, "matrix right-hand side changed dimension");
    std::copy(d.values().begin(), d.values().end(), dx.begin());
  };
  Trajectory traj = integrate_vector(flat, m0.values(), span, opts);
  traj.matrix_n_ = n;
  return traj;
}

}  // namespace fg
