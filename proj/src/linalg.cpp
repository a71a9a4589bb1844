#include "linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fg {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMat = Eigen::MatrixXcd;

Eigen::Map<const EMat> view(const SquareMatrix& a) {
  return {a.data(), static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a.size())};
}

SquareMatrix from_eigen(const EMat& m) {
  SquareMatrix out(static_cast<std::size_t>(m.rows()));
  std::copy(m.data(), m.data() + m.size(), out.data());
  return out;
}

void require_same(const SquareMatrix& a, const SquareMatrix& b, const char* op) {
  if (a.size() != b.size())
    throw Error(ErrorCode::Dimension, std::string(op) + ": dimension mismatch (" + std::to_string(a.size()) +
                                          " vs " + std::to_string(b.size()) + ")");
}

// Solves lhs * X = rhs.
SquareMatrix solve(const SquareMatrix& lhs, const SquareMatrix& rhs) {
  Eigen::PartialPivLU<EMat> lu(view(lhs));
  return from_eigen(lu.solve(EMat(view(rhs))));
}

SquareMatrix sum_scaled(const SquareMatrix& id, double c0, std::initializer_list<std::pair<double, const SquareMatrix*>> terms) {
  SquareMatrix out = id * c0;
  for (auto& [c, m] : terms) {
    for (std::size_t k = 0; k < out.values().size(); ++k) out.data()[k] += c * m->data()[k];
  }
  return out;
}

// --- Matrix exponential: Higham (2005) scaling and squaring -----------------

constexpr std::array<double, 4> kB3{120., 60., 12., 1.};
constexpr std::array<double, 6> kB5{30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kB7{17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
constexpr std::array<double, 10> kB9{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                     2162160.,     110880.,      3960.,        90.,         1.};
constexpr std::array<double, 14> kB13{64764752532480000., 32382376266240000., 7771770303897600.,
                                      1187353796428800.,  129060195264000.,   10559470521600.,
                                      670442572800.,      33522128640.,       1323241920.,
                                      40840800.,          960960.,            16380.,
                                      182.,               1.};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
SquareMatrix pade_low(const SquareMatrix& a, const std::array<double, N>& b) {
  const std::size_t n = a.size();
  const SquareMatrix id = SquareMatrix::identity(n);
  const SquareMatrix a2 = a * a;
  // powers[k] = A^(2k)
  std::vector<SquareMatrix> powers{id, a2};
  while (2 * powers.size() < N) powers.push_back(powers.back() * a2);
  SquareMatrix u_inner(n), v(n);
  for (std::size_t k = 0; k < N; ++k) {
    SquareMatrix term = powers[k / 2] * b[k];
    if (k % 2 == 0) {
      v += term;
    } else {
      u_inner += term;
    }
  }
  const SquareMatrix u = a * u_inner;
  return solve(v - u, v + u);
}

SquareMatrix pade13(const SquareMatrix& a) {
  const auto& b = kB13;
  const SquareMatrix id = SquareMatrix::identity(a.size());
  const SquareMatrix a2 = a * a;
  const SquareMatrix a4 = a2 * a2;
  const SquareMatrix a6 = a4 * a2;
  SquareMatrix zero(a.size());
  const SquareMatrix u1 = a6 * sum_scaled(zero, 0.0, {{b[13], &a6}, {b[11], &a4}, {b[9], &a2}});
  const SquareMatrix u2 = sum_scaled(id, b[1], {{b[7], &a6}, {b[5], &a4}, {b[3], &a2}});
  const SquareMatrix u = a * (u1 + u2);
  const SquareMatrix v1 = a6 * sum_scaled(zero, 0.0, {{b[12], &a6}, {b[10], &a4}, {b[8], &a2}});
  const SquareMatrix v = v1 + sum_scaled(id, b[0], {{b[6], &a6}, {b[4], &a4}, {b[2], &a2}});
  return solve(v - u, v + u);
}

// --- Real logarithm ----------------------------------------------------------

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = 0.5 * (x + 1.0);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);  // (2/((1-x^2)p'^2)) / 2
  }
}

// Product form of the Denman-Beavers iteration with determinantal scaling.
SquareMatrix sqrtm_db(const SquareMatrix& a) {
  const std::size_t n = a.size();
  const SquareMatrix id = SquareMatrix::identity(n);
  SquareMatrix m = a;
  SquareMatrix x = a;
  bool scale = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const InverseResult inv = inverse_with_det(m);
    double mu = 1.0;
    if (scale) mu = std::pow(std::abs(inv.det), -1.0 / (2.0 * n));
    const double mu2 = mu * mu;
    const SquareMatrix next_m = (id + (m * mu2 + inv.inverse * (1.0 / mu2)) * 0.5) * 0.5;
    x = (x * (id + inv.inverse * (1.0 / mu2))) * (0.5 * mu);
    const double delta = max_norm(next_m - id);
    m = next_m;
    if (delta < 1e-2) scale = false;
    if (delta <= 1e-15 * static_cast<double>(n) || (delta < 1e-10 && delta >= prev)) return x;
    prev = delta;
  }
  if (max_norm(m - id) > 1e-10) throw Error(ErrorCode::Convergence, "matrix square root iteration did not converge");
  return x;
}

SquareMatrix log_inverse_scaling_squaring(const SquareMatrix& a) {
  const std::size_t n = a.size();
  const SquareMatrix id = SquareMatrix::identity(n);
  SquareMatrix x = a;
  int k = 0;
  while (norm1(x - id) > 0.25) {
    if (++k > 64) throw Error(ErrorCode::Convergence, "logarithm: square root sequence did not approach identity");
    x = sqrtm_db(x);
  }
  const SquareMatrix y = x - id;
  std::vector<double> nodes, weights;
  gauss_legendre(8, nodes, weights);
  SquareMatrix log(n);
  for (std::size_t j = 0; j < nodes.size(); ++j) log += solve(id + y * nodes[j], y) * weights[j];
  return log * std::ldexp(1.0, k);
}

bool is_negative_real(std::complex<double> z) {
  return std::abs(z.imag()) < 1e-9 * std::abs(z) && z.real() < 0.0;
}

// Diagonalization route for matrices with negative real eigenvalues of even
// multiplicity: eigenvectors of each negative pair are recombined into a
// conjugate pair so the logarithm comes out real.
SquareMatrix log_by_eigenvectors(const SquareMatrix& a) {
  const Eigen::Index n = static_cast<Eigen::Index>(a.size());
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(view(a)), true);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Convergence, "eigen decomposition did not converge");
  Eigen::VectorXcd lambda = es.eigenvalues();
  CMat v = es.eigenvectors();
  Eigen::VectorXcd logs(n);
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (done[i]) continue;
    if (!is_negative_real(lambda[i])) {
      logs[i] = std::log(lambda[i]);
      done[i] = true;
      continue;
    }
    Eigen::Index partner = -1;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!done[j] && is_negative_real(lambda[j]) &&
          std::abs(lambda[j] - lambda[i]) <= 1e-6 * std::abs(lambda[i])) {
        partner = j;
        break;
      }
    }
    if (partner < 0) throw Error(ErrorCode::NoRealLogarithm, "no real logarithm: unpaired negative eigenvalue");
    const double mag = std::log(0.5 * (std::abs(lambda[i]) + std::abs(lambda[partner])));
    if (lambda[i].imag() != 0.0 && lambda[partner] == std::conj(lambda[i])) {
      // Already a conjugate pair with conjugate eigenvectors.
      const double sign = lambda[i].imag() > 0.0 ? 1.0 : -1.0;
      logs[i] = {mag, sign * std::numbers::pi};
      logs[partner] = {mag, -sign * std::numbers::pi};
    } else {
      const Eigen::VectorXd v1 = v.col(i).real();
      const Eigen::VectorXd v2 = v.col(partner).real();
      v.col(i) = v1.cast<std::complex<double>>() + std::complex<double>(0, 1) * v2.cast<std::complex<double>>();
      v.col(partner) = v1.cast<std::complex<double>>() - std::complex<double>(0, 1) * v2.cast<std::complex<double>>();
      logs[i] = {mag, std::numbers::pi};
      logs[partner] = {mag, -std::numbers::pi};
    }
    done[i] = done[partner] = true;
  }
  Eigen::PartialPivLU<CMat> lu(v);
  const CMat l = v * logs.asDiagonal() * lu.inverse();
  const EMat real = l.real();
  SquareMatrix out = from_eigen(real);
  const double scale = std::max(1.0, max_norm(a));
  if (!out.all_finite() || l.imag().cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, max_norm(out)) ||
      max_norm(expm(out) - a) > 1e-9 * scale) {
    throw Error(ErrorCode::NoRealLogarithm, "no real logarithm: negative eigenvalues could not be paired");
  }
  return out;
}

}  // namespace

// --- SquareMatrix ------------------------------------------------------------

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
  if (a_.size() != n * n)
    throw Error(ErrorCode::Dimension, "matrix needs " + std::to_string(n * n) + " entries, got " + std::to_string(a_.size()));
}

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
  a_.reserve(n_ * n_);
  for (auto& row : rows) {
    if (row.size() != n_) throw Error(ErrorCode::Dimension, "matrix rows must all have length " + std::to_string(n_));
    a_.insert(a_.end(), row.begin(), row.end());
  }
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(const std::vector<double>& d) {
  SquareMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

SquareMatrix SquareMatrix::transpose() const {
  SquareMatrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double SquareMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

bool SquareMatrix::all_finite() const {
  return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

SquareMatrix& SquareMatrix::operator+=(const SquareMatrix& o) {
  require_same(*this, o, "add");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

SquareMatrix& SquareMatrix::operator-=(const SquareMatrix& o) {
  require_same(*this, o, "subtract");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

SquareMatrix& SquareMatrix::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) { return a += b; }
SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) { return a -= b; }
SquareMatrix operator-(SquareMatrix a) { return a *= -1.0; }
SquareMatrix operator*(SquareMatrix a, double s) { return a *= s; }
SquareMatrix operator*(double s, SquareMatrix a) { return a *= s; }
SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) { return mul(a, b); }

SquareMatrix mul(const SquareMatrix& a, const SquareMatrix& b) {
  require_same(a, b, "multiply");
  const std::size_t n = a.size();
  SquareMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

std::vector<double> mul(const SquareMatrix& a, const std::vector<double>& x) {
  if (x.size() != a.size()) throw Error(ErrorCode::Dimension, "matrix-vector product: dimension mismatch");
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

SquareMatrix commutator(const SquareMatrix& a, const SquareMatrix& b) { return a * b - b * a; }

double max_norm(const SquareMatrix& a) { return max_norm(a.values()); }

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm1(const SquareMatrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

InverseResult inverse_with_det(const SquareMatrix& a) {
  if (a.size() == 0) throw Error(ErrorCode::Dimension, "inverse of empty matrix");
  Eigen::PartialPivLU<EMat> lu(view(a));
  const double det = lu.determinant();
  const double scale = std::pow(max_norm(a), static_cast<double>(a.size()));
  if (!(std::abs(det) > 1e-12 * scale) || !std::isfinite(det)) {
    throw NearSingularError(det, 0.0, false, "matrix is numerically singular (det = " + std::to_string(det) + ")");
  }
  return {from_eigen(lu.inverse()), det};
}

SquareMatrix inverse(const SquareMatrix& a) { return inverse_with_det(a).inverse; }

double determinant(const SquareMatrix& a) {
  if (a.size() == 0) return 1.0;
  return Eigen::PartialPivLU<EMat>(view(a)).determinant();
}

SquareMatrix expm(const SquareMatrix& a) {
  if (!a.all_finite()) throw Error(ErrorCode::Domain, "matrix exponential of non-finite matrix");
  const std::size_t n = a.size();
  const double norm = norm1(a);
  if (norm == 0.0) return SquareMatrix::identity(n);
  SquareMatrix result;
  if (norm <= kTheta3) {
    result = pade_low(a, kB3);
  } else if (norm <= kTheta5) {
    result = pade_low(a, kB5);
  } else if (norm <= kTheta7) {
    result = pade_low(a, kB7);
  } else if (norm <= kTheta9) {
    result = pade_low(a, kB9);
  } else {
    const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    result = pade13(a * std::ldexp(1.0, -s));
    for (int i = 0; i < s; ++i) result = result * result;
  }
  if (!result.all_finite()) throw Error(ErrorCode::Domain, "matrix exponential overflow");
  return result;
}

SquareMatrix logm_real(const SquareMatrix& a) {
  if (!a.all_finite()) throw Error(ErrorCode::Domain, "logarithm of non-finite matrix");
  (void)inverse_with_det(a);  // singular input has no logarithm
  const ComplexSpectrum spec = eigenvalues(a);
  std::vector<std::complex<double>> negatives;
  for (auto z : spec.eigenvalues)
    if (is_negative_real(z)) negatives.push_back(z);
  if (negatives.empty()) return log_inverse_scaling_squaring(a);

  std::vector<bool> used(negatives.size(), false);
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    if (used[i]) continue;
    int count = 0;
    for (std::size_t j = i; j < negatives.size(); ++j) {
      if (!used[j] && std::abs(negatives[j] - negatives[i]) <= 1e-6 * std::abs(negatives[i])) {
        used[j] = true;
        ++count;
      }
    }
    if (count % 2 == 1) {
      throw Error(ErrorCode::NoRealLogarithm,
                  "no real logarithm: negative real eigenvalue " + std::to_string(negatives[i].real()) +
                      " has odd multiplicity");
    }
  }
  return log_by_eigenvectors(a);
}

ComplexSpectrum eigenvalues(const SquareMatrix& a) {
  if (!a.all_finite()) throw Error(ErrorCode::Domain, "eigenvalues of non-finite matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(view(a)), false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Convergence, "eigenvalue iteration did not converge");
  ComplexSpectrum out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.eigenvalues.push_back(es.eigenvalues()[i]);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

}  // namespace fg
