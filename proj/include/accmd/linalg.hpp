#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "accmd/common.hpp"
#include "accmd/rng.hpp"

namespace accmd {

// ---------------------------------------------------------------------------
// Vector kernels. Plain free functions over std::vector<double>; dimensions
// are checked on the operations that mix operands.

inline void check_same_dim(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size())
    throw usage_error(std::string(op) + ": dimension mismatch (" +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
}

inline double dot(const Vector& a, const Vector& b) {
  check_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vector add(const Vector& a, const Vector& b) {
  check_same_dim(a, b, "add");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector sub(const Vector& a, const Vector& b) {
  check_same_dim(a, b, "sub");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector scaled(double c, const Vector& a) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

// y += c * x
inline void axpy(double c, const Vector& x, Vector& y) {
  check_same_dim(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline double norm_l1(const Vector& v) {
  double s = 0.0;
  for (double t : v) s += std::fabs(t);
  return s;
}

inline double norm_l2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm_linf(const Vector& v) {
  double s = 0.0;
  for (double t : v) s = std::max(s, std::fabs(t));
  return s;
}

// 4-norm; its fourth power is the quartic data-fit penalty.
inline double norm_l4(const Vector& v) {
  double s = 0.0;
  for (double t : v) {
    const double t2 = t * t;
    s += t2 * t2;
  }
  return std::pow(s, 0.25);
}

// ---------------------------------------------------------------------------
// Matrices. Row-major dense storage; a separate diagonal type for the metric
// D = diag(A^T A) so the common case never materializes a full matrix.

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // a.size() == rows * cols

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

struct DiagonalMatrix {
  Vector diagonal;
};

inline Vector matvec(const DenseMatrix& m, const Vector& v) {
  if (m.cols != v.size())
    throw usage_error("matvec: dimension mismatch (" + std::to_string(m.cols) +
                      " cols vs vector of " + std::to_string(v.size()) + ")");
  Vector r(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    const double* row = m.a.data() + i * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * v[j];
    r[i] = s;
  }
  return r;
}

// r = M^T v without forming the transpose.
inline Vector matvec_transposed(const DenseMatrix& m, const Vector& v) {
  if (m.rows != v.size())
    throw usage_error("matvec_transposed: dimension mismatch");
  Vector r(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.a.data() + i * m.cols;
    const double vi = v[i];
    for (std::size_t j = 0; j < m.cols; ++j) r[j] += row[j] * vi;
  }
  return r;
}

inline Vector matvec(const DiagonalMatrix& m, const Vector& v) {
  check_same_dim(m.diagonal, v, "matvec(diagonal)");
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = m.diagonal[i] * v[i];
  return r;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) throw usage_error("matmul: dimension mismatch");
  DenseMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

// M M^T, symmetric by construction.
inline DenseMatrix gram_outer(const DenseMatrix& m) {
  DenseMatrix g(m.rows, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = i; j < m.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m.cols; ++k) s += m(i, k) * m(j, k);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Cholesky factorization, used for SPD detection and for the small solves in
// quadratic mirrors and reference computations. Returns the lower factor L
// with L L^T = A, or nullopt if a pivot is not strictly positive.

inline std::optional<DenseMatrix> cholesky(const DenseMatrix& m) {
  if (m.rows != m.cols) return std::nullopt;
  const std::size_t n = m.rows;
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

// Solves A x = b given the lower Cholesky factor of A.
inline Vector cholesky_solve(const DenseMatrix& l, const Vector& b) {
  const std::size_t n = l.rows;
  if (b.size() != n) throw usage_error("cholesky_solve: dimension mismatch");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Power iteration for the dominant eigenvalue of a symmetric positive
// semidefinite operator. Seeded uniform start, normalization every sweep,
// convergence on the relative change of the Rayleigh quotient. The returned
// value is the Rayleigh quotient of the returned vector, so the two are
// consistent by construction.

struct PowerResult {
  double value = 0.0;
  Vector eigenvector;
  int iterations = 0;
  bool converged = false;
};

template <class Op>
PowerResult power_method(Op&& apply, std::size_t dim, double tol,
                         int max_iters, std::uint64_t seed) {
  Rng rng(seed);
  Vector x = rng.uniform_vector(dim);
  double nx = norm_l2(x);
  if (nx == 0.0) {
    x.assign(dim, 1.0);
    nx = std::sqrt(static_cast<double>(dim));
  }
  for (auto& t : x) t /= nx;

  PowerResult out;
  double rayleigh = 0.0;
  for (int k = 1; k <= max_iters; ++k) {
    Vector ax = apply(x);
    check_same_dim(ax, x, "power_method operator");
    const double next = dot(x, ax);
    const double nax = norm_l2(ax);
    out.iterations = k;
    if (nax == 0.0) {
      // Operator annihilated the iterate: dominant eigenvalue is 0.
      out.value = 0.0;
      out.eigenvector = x;
      out.converged = true;
      return out;
    }
    for (std::size_t i = 0; i < dim; ++i) x[i] = ax[i] / nax;
    if (k > 1 &&
        std::fabs(next - rayleigh) <= tol * std::max(1.0, std::fabs(next))) {
      rayleigh = next;
      out.converged = true;
      break;
    }
    rayleigh = next;
  }
  // Report the Rayleigh quotient at the final normalized iterate.
  Vector ax = apply(x);
  out.value = dot(x, ax);
  out.eigenvector = std::move(x);
  return out;
}

// Smallest eigenvalue of a dense SPD matrix by inverse power iteration on the
// Cholesky factorization. Same Rayleigh-based stopping rule.
inline PowerResult inverse_power_method(const DenseMatrix& m, double tol,
                                        int max_iters, std::uint64_t seed) {
  auto l = cholesky(m);
  if (!l) throw config_error("inverse_power_method: matrix is not SPD");
  Rng rng(seed);
  const std::size_t dim = m.rows;
  Vector x = rng.uniform_vector(dim);
  double nx = norm_l2(x);
  for (auto& t : x) t /= nx;

  PowerResult out;
  double rayleigh = 0.0;
  for (int k = 1; k <= max_iters; ++k) {
    Vector z = cholesky_solve(*l, x);
    const double nz = norm_l2(z);
    for (auto& t : z) t /= nz;
    Vector mz = matvec(m, z);
    const double next = dot(z, mz);
    out.iterations = k;
    x = std::move(z);
    if (k > 1 &&
        std::fabs(next - rayleigh) <= tol * std::max(1.0, std::fabs(next))) {
      rayleigh = next;
      out.converged = true;
      break;
    }
    rayleigh = next;
  }
  out.value = rayleigh;
  out.eigenvector = std::move(x);
  return out;
}

}  // namespace accmd
