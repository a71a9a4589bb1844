#include "time_matrix.hpp"

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

}  // namespace

TimeMatrix TimeMatrix::closed_form(std::size_t n, std::vector<Expression> entries, Interval domain) {
  if (n == 0 || entries.size() != n * n)
    throw Error(ErrorCode::Dimension, "closed-form matrix needs " + std::to_string(n * n) + " entries");
  for (const auto& e : entries) {
    for (const auto& sym : free_symbols(e)) {
      if (sym != "t") throw Error(ErrorCode::UnboundSymbol, "unbound symbol '" + sym + "' in matrix entry " + to_string(e));
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::ClosedForm;
  impl->n = n;
  impl->domain = domain;
  impl->d_entries.reserve(entries.size());
  for (const auto& e : entries) impl->d_entries.push_back(differentiate(e, "t"));
  impl->entries = std::move(entries);
  TimeMatrix m;
  m.impl_ = std::move(impl);
  return m;
}

TimeMatrix TimeMatrix::parse(std::size_t n, const std::vector<std::string>& entries, const ParamMap& params,
                             Interval domain) {
  std::vector<Expression> parsed;
  parsed.reserve(entries.size());
  for (const auto& s : entries) parsed.push_back(fg::bind(fg::parse(s), params));
  return closed_form(n, std::move(parsed), domain);
}

TimeMatrix TimeMatrix::constant(const SquareMatrix& m) {
  std::vector<Expression> entries;
  entries.reserve(m.values().size());
  for (double v : m.values()) entries.push_back(Expression::number(v));
  return closed_form(m.size(), std::move(entries));
}

TimeMatrix TimeMatrix::sampled(Trajectory matrix_trajectory) {
  if (!matrix_trajectory.is_matrix()) throw Error(ErrorCode::Dimension, "sampled matrix needs a matrix trajectory");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Sampled;
  impl->n = matrix_trajectory.matrix_size();
  impl->domain = {matrix_trajectory.t_begin(), matrix_trajectory.t_end()};
  impl->traj = std::make_shared<const Trajectory>(std::move(matrix_trajectory));
  TimeMatrix m;
  m.impl_ = std::move(impl);
  return m;
}

TimeMatrix TimeMatrix::function(std::size_t n, ValueFn value, ValueFn derivative, Interval domain) {
  if (!value) throw Error(ErrorCode::InvalidArgument, "function matrix needs a value callable");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Function;
  impl->n = n;
  impl->domain = domain;
  impl->value = std::move(value);
  impl->derivative = std::move(derivative);
  TimeMatrix m;
  m.impl_ = std::move(impl);
  return m;
}

bool TimeMatrix::contains(double t) const {
  const Interval d = domain();
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  return t >= d[0] - slack && t <= d[1] + slack;
}

SquareMatrix TimeMatrix::value(double t) const {
  if (!impl_) throw Error(ErrorCode::InvalidArgument, "empty time matrix");
  if (!contains(t)) throw Error(ErrorCode::OutOfRange, "time " + describe(t) + " outside matrix domain");
  switch (impl_->kind) {
    case Kind::ClosedForm: {
      SquareMatrix m(impl_->n);
      for (std::size_t k = 0; k < impl_->entries.size(); ++k) m.data()[k] = eval_at(impl_->entries[k], t);
      return m;
    }
    case Kind::Sampled:
      return impl_->traj->eval_matrix(t);
    case Kind::Function:
      return impl_->value(t);
  }
  return {};
}

SquareMatrix TimeMatrix::derivative(double t) const {
  if (!impl_) throw Error(ErrorCode::InvalidArgument, "empty time matrix");
  if (!contains(t)) throw Error(ErrorCode::OutOfRange, "time " + describe(t) + " outside matrix domain");
  switch (impl_->kind) {
    case Kind::ClosedForm: {
      SquareMatrix m(impl_->n);
      for (std::size_t k = 0; k < impl_->d_entries.size(); ++k) m.data()[k] = eval_at(impl_->d_entries[k], t);
      return m;
    }
    case Kind::Sampled:
      return impl_->traj->eval_matrix_derivative(t);
    case Kind::Function: {
      if (impl_->derivative) return impl_->derivative(t);
      const auto& f = impl_->value;
      auto flat = [&f](double s) { return f(s).values(); };
      return SquareMatrix(impl_->n, fd_derivative(flat, t, impl_->domain, 1e-3 * std::max(1.0, std::abs(t))));
    }
  }
  return {};
}

const std::vector<Expression>& TimeMatrix::entries() const {
  if (kind() != Kind::ClosedForm) throw Error(ErrorCode::InvalidArgument, "matrix is not closed-form");
  return impl_->entries;
}

const std::vector<Expression>& TimeMatrix::derivative_entries() const {
  if (kind() != Kind::ClosedForm) throw Error(ErrorCode::InvalidArgument, "matrix is not closed-form");
  return impl_->d_entries;
}

const Trajectory& TimeMatrix::trajectory() const {
  if (kind() != Kind::Sampled) throw Error(ErrorCode::InvalidArgument, "matrix is not sampled");
  return *impl_->traj;
}

TimeMatrix TimeMatrix::restricted(Interval domain) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->domain = intersect(impl_->domain, domain);
  TimeMatrix m;
  m.impl_ = std::move(impl);
  return m;
}

TimeMatrix multiply(const TimeMatrix& a, const TimeMatrix& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::Dimension, "time matrix product: dimension mismatch");
  return TimeMatrix::function(
      a.size(), [a, b](double t) { return a.value(t) * b.value(t); },
      [a, b](double t) { return a.derivative(t) * b.value(t) + a.value(t) * b.derivative(t); },
      intersect(a.domain(), b.domain()));
}

TimeMatrix pointwise_inverse(const TimeMatrix& p) {
  auto inv_at = [p](double t) {
    try {
      return inverse(p.value(t));
    } catch (const NearSingularError& e) {
      throw NearSingularError(e.determinant(), t, true, "matrix singular at t = " + describe(t));
    }
  };
  return TimeMatrix::function(
      p.size(), inv_at,
      [p, inv_at](double t) {
        const SquareMatrix inv = inv_at(t);
        return -(inv * p.derivative(t) * inv);
      },
      p.domain());
}

TimeMatrix block(const TimeMatrix& a, const TimeMatrix& b, const TimeMatrix& c, const TimeMatrix& d) {
  const std::size_t n = a.size();
  if (b.size() != n || c.size() != n || d.size() != n)
    throw Error(ErrorCode::Dimension, "block matrix: blocks must share one dimension");
  const Interval dom = intersect(intersect(a.domain(), b.domain()), intersect(c.domain(), d.domain()));
  const std::array<const TimeMatrix*, 4> parts{&a, &b, &c, &d};
  const bool closed = std::all_of(parts.begin(), parts.end(),
                                  [](const TimeMatrix* m) { return m->kind() == TimeMatrix::Kind::ClosedForm; });
  if (closed) {
    std::vector<Expression> entries(4 * n * n);
    for (std::size_t bi = 0; bi < 2; ++bi)
      for (std::size_t bj = 0; bj < 2; ++bj) {
        const auto& src = parts[2 * bi + bj]->entries();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) entries[(bi * n + i) * 2 * n + bj * n + j] = src[i * n + j];
      }
    return TimeMatrix::closed_form(2 * n, std::move(entries), dom);
  }
  auto held = std::make_shared<std::array<TimeMatrix, 4>>(std::array<TimeMatrix, 4>{a, b, c, d});
  auto value = [held, n](double t) {
    SquareMatrix out(2 * n);
    for (std::size_t k = 0; k < 4; ++k) {
      const SquareMatrix m = (*held)[k].value(t);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out((k / 2) * n + i, (k % 2) * n + j) = m(i, j);
    }
    return out;
  };
  auto deriv = [held, n](double t) {
    SquareMatrix out(2 * n);
    for (std::size_t k = 0; k < 4; ++k) {
      const SquareMatrix m = (*held)[k].derivative(t);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out((k / 2) * n + i, (k % 2) * n + j) = m(i, j);
    }
    return out;
  };
  return TimeMatrix::function(2 * n, value, deriv, dom);
}

Interval intersect(Interval a, Interval b) {
  Interval r{std::max(a[0], b[0]), std::min(a[1], b[1])};
  if (r[0] > r[1]) throw Error(ErrorCode::OutOfRange, "domains do not overlap");
  return r;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  g.back() = hi;
  return g;
}

std::vector<double> fd_derivative(const std::function<std::vector<double>(double)>& fn, double t, Interval domain,
                                  double h) {
  std::vector<double> out;
  auto combine = [&](std::initializer_list<std::pair<double, double>> stencil, double scale) {
    for (auto [offset, weight] : stencil) {
      const std::vector<double> v = fn(t + offset * h);
      if (out.empty()) out.assign(v.size(), 0.0);
      for (std::size_t k = 0; k < v.size(); ++k) out[k] += weight * v[k];
    }
    for (double& x : out) x /= scale;
  };
  const double span = domain[1] - domain[0];
  if (std::isfinite(span) && span < 8 * h) h = span / 8;
  if (t - 2 * h >= domain[0] && t + 2 * h <= domain[1]) {
    combine({{-2, 1}, {-1, -8}, {1, 8}, {2, -1}}, 12 * h);
  } else if (t + 4 * h <= domain[1]) {
    combine({{0, -25}, {1, 48}, {2, -36}, {3, 16}, {4, -3}}, 12 * h);
  } else {
    combine({{0, 25}, {-1, -48}, {-2, 36}, {-3, -16}, {-4, 3}}, 12 * h);
  }
  return out;
}

}  // namespace fg
