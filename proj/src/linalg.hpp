#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "error.hpp"

namespace fg {

/// Dense real n x n matrix, row-major, dimension chosen at run time.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
  SquareMatrix(std::size_t n, std::vector<double> row_major);
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SquareMatrix identity(std::size_t n);
  static SquareMatrix diagonal(const std::vector<double>& d);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<double>& values() const noexcept { return a_; }
  double* data() noexcept { return a_.data(); }
  const double* data() const noexcept { return a_.data(); }

  SquareMatrix transpose() const;
  double trace() const;
  bool all_finite() const;

  SquareMatrix& operator+=(const SquareMatrix& o);
  SquareMatrix& operator-=(const SquareMatrix& o);
  SquareMatrix& operator*=(double s);

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b);
SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b);
SquareMatrix operator-(SquareMatrix a);
SquareMatrix operator*(SquareMatrix a, double s);
SquareMatrix operator*(double s, SquareMatrix a);
SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);

/// Plain triple-loop product; throws Dimension on mismatch.
SquareMatrix mul(const SquareMatrix& a, const SquareMatrix& b);
std::vector<double> mul(const SquareMatrix& a, const std::vector<double>& x);
SquareMatrix commutator(const SquareMatrix& a, const SquareMatrix& b);

/// Largest absolute entry.
double max_norm(const SquareMatrix& a);
double max_norm(const std::vector<double>& v);
/// Induced 1-norm (max column sum).
double norm1(const SquareMatrix& a);

struct InverseResult {
  SquareMatrix inverse;
  double det;
};

/// LU with partial pivoting. Throws NearSingularError when
/// |det| <= 1e-12 * max_norm(a)^n.
InverseResult inverse_with_det(const SquareMatrix& a);
SquareMatrix inverse(const SquareMatrix& a);
double determinant(const SquareMatrix& a);

SquareMatrix expm(const SquareMatrix& a);

/// Principal real logarithm. Throws Error(NoRealLogarithm) when none exists.
SquareMatrix logm_real(const SquareMatrix& a);

struct ComplexSpectrum {
  std::vector<std::complex<double>> eigenvalues;  // sorted by (real, imag)
};

ComplexSpectrum eigenvalues(const SquareMatrix& a);

}  // namespace fg
