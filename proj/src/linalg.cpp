#include "incodim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace incodim {

Matrix::Matrix(std::size_t n, std::vector<cplx> entries) : n_(n), a_(std::move(entries)) {
  if (a_.size() != n * n) throw std::invalid_argument("Matrix: entry count does not match dimension");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix r(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

cplx Matrix::trace() const {
  cplx t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : a_) m = std::max(m, std::abs(z));
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (o.n_ != n_) throw std::invalid_argument("Matrix: dimension mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (o.n_ != n_) throw std::invalid_argument("Matrix: dimension mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

Matrix& Matrix::operator*=(cplx s) {
  for (auto& z : a_) z *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(cplx s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Matrix: dimension mismatch");
  const std::size_t n = a.dim();
  Matrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Matrix: dimension mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

HermitianEigen jacobi_eigh(const Matrix& h, bool want_vectors) {
  const std::size_t n = h.dim();
  Matrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));
  Matrix v = want_vectors ? Matrix::identity(n) : Matrix();

  double scale = 0.0;
  for (const auto& z : a.data()) scale += std::norm(z);
  scale = std::sqrt(scale);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-17 * scale || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double g = std::abs(a(p, q));
        if (g == 0.0) continue;
        const cplx phase = a(p, q) / g;  // e^{i phi}
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = D R on the (p,q) plane: J_pp = c, J_pq = s, J_qp = -s e^{-i phi}, J_qq = c e^{-i phi}
        const cplx jpp = c, jpq = s, jqp = -s * std::conj(phase), jqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {  // A <- A J
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- J^dagger A
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        if (want_vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            const cplx vkp = v(k, p), vkq = v(k, q);
            v(k, p) = vkp * jpp + vkq * jqp;
            v(k, q) = vkp * jpq + vkq * jqq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
  HermitianEigen out;
  out.values.resize(n);
  if (want_vectors) out.vectors = Matrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    if (want_vectors)
      for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

ColumnSvd svd_columns(std::vector<std::vector<double>> cols) {
  const std::size_t k = cols.size();
  const std::size_t m = k ? cols[0].size() : 0;
  std::vector<std::vector<double>> v(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) v[i][i] = 1.0;

  auto dot = [m](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += x[r] * y[r];
    return s;
  };

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const double alpha = dot(cols[i], cols[i]);
        const double beta = dot(cols[j], cols[j]);
        const double gamma = dot(cols[i], cols[j]);
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          const double xi = cols[i][r], xj = cols[j][r];
          cols[i][r] = c * xi - s * xj;
          cols[j][r] = s * xi + c * xj;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double xi = v[r][i], xj = v[r][j];
          v[r][i] = c * xi - s * xj;
          v[r][j] = s * xi + c * xj;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(k);
  for (std::size_t i = 0; i < k; ++i) norms[i] = std::sqrt(dot(cols[i], cols[i]));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  ColumnSvd out;
  for (std::size_t idx : order) {
    out.sigma.push_back(norms[idx]);
    std::vector<double> u(m, 0.0);
    if (norms[idx] > 0.0)
      for (std::size_t r = 0; r < m; ++r) u[r] = cols[idx][r] / norms[idx];
    out.u.push_back(std::move(u));
    std::vector<double> vv(k);
    for (std::size_t r = 0; r < k; ++r) vv[r] = v[r][idx];
    out.v.push_back(std::move(vv));
  }
  return out;
}

std::size_t numerical_rank(const ColumnSvd& s, double cutoff) {
  std::size_t r = 0;
  for (double x : s.sigma)
    if (x > cutoff) ++r;
  return r;
}

}  // namespace incodim
