#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace incodim {

using cplx = std::complex<double>;

// Dense square complex matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), a_(n * n) {}
  Matrix(std::size_t n, std::vector<cplx> entries);

  static Matrix identity(std::size_t n);

  std::size_t dim() const noexcept { return n_; }
  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<cplx>& data() const noexcept { return a_; }

  Matrix adjoint() const;
  cplx trace() const;
  double max_abs() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(cplx s);

 private:
  std::size_t n_ = 0;
  std::vector<cplx> a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(cplx s, Matrix a);

// Max elementwise |a - b|.
double max_abs_diff(const Matrix& a, const Matrix& b);

// Cyclic Jacobi for a Hermitian matrix (only the Hermitian part is read).
// Eigenvalues ascending; column k of `vectors` is the k-th eigenvector.
struct HermitianEigen {
  std::vector<double> values;
  Matrix vectors;
};
HermitianEigen jacobi_eigh(const Matrix& h, bool want_vectors = true);

// Thin SVD by one-sided (Hestenes) Jacobi of a real matrix given as columns.
// M = U diag(sigma) V^T; u[k] has the column length, v[k] has one entry per column.
// Singular triplets are sorted by decreasing sigma.
struct ColumnSvd {
  std::vector<double> sigma;
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v;
};
ColumnSvd svd_columns(std::vector<std::vector<double>> cols);

// Number of singular values above cutoff.
std::size_t numerical_rank(const ColumnSvd& s, double cutoff);

}  // namespace incodim
