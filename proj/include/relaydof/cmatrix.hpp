/*
 * Copyright 2026 The relaydof Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RELAYDOF_CMATRIX_HPP
#define RELAYDOF_CMATRIX_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "relaydof/errors.hpp"

namespace relaydof {

using cxd = std::complex<double>;

/// Relative threshold for numerical rank / singularity decisions.
/// Channel entries are O(1) by the model, so 1e-10 separates genuine
/// zeros (nulled directions) from generic values by many decades.
struct Tolerance {
  double rel_eps = 1e-10;

  Tolerance() = default;
  explicit Tolerance(double eps) : rel_eps(eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
      throw ConfigError("Tolerance rel_eps must lie in (0, 1)");
    }
  }
};

/// Dense complex matrix, row-major. Small (everything in this project is
/// at most ~9x9), value-semantic, entries validated finite on construction
/// from external data.
class CMatrix {
 public:
  CMatrix() : rows_(1), cols_(1), data_(1, cxd{}) {}

  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cxd{}) {
    check_dims_();
  }

  CMatrix(std::size_t rows, std::size_t cols, std::vector<cxd> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims_();
    if (data_.size() != rows_ * cols_) {
      throw ConfigError("CMatrix: entry count does not match rows*cols");
    }
    check_finite_();
  }

  CMatrix(std::initializer_list<std::initializer_list<cxd>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    check_dims_();
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
      if (r.size() != cols_) {
        throw ConfigError("CMatrix: ragged initializer");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
    check_finite_();
  }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cxd& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cxd& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  const std::vector<cxd>& data() const { return data_; }

  CMatrix operator+(const CMatrix& o) const {
    CMatrix r = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
    return r;
  }

  CMatrix operator-(const CMatrix& o) const {
    CMatrix r = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
    return r;
  }

  CMatrix operator*(const CMatrix& o) const {
    CMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < cols_; ++k) {
        const cxd aik = (*this)(i, k);
        if (aik == cxd{}) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) {
          r(i, j) += aik * o(k, j);
        }
      }
    }
    return r;
  }

  CMatrix operator*(cxd s) const {
    CMatrix r = *this;
    for (auto& x : r.data_) x *= s;
    return r;
  }

  CMatrix transpose() const {
    CMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  CMatrix conjugate() const {
    CMatrix r = *this;
    for (auto& x : r.data_) x = std::conj(x);
    return r;
  }

  /// Conjugate transpose.
  CMatrix adjoint() const { return transpose().conjugate(); }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  CMatrix row(std::size_t i) const {
    CMatrix r(1, cols_);
    for (std::size_t j = 0; j < cols_; ++j) r(0, j) = (*this)(i, j);
    return r;
  }

  CMatrix col(std::size_t j) const {
    CMatrix c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
  }

  void set_col(std::size_t j, const CMatrix& c) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c(i, 0);
  }

 private:
  void check_dims_() const {
    if (rows_ < 1 || cols_ < 1) {
      throw ConfigError("CMatrix: rows and cols must be >= 1");
    }
  }
  void check_finite_() const {
    for (const auto& x : data_) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
        throw ConfigError("CMatrix: non-finite entry");
      }
    }
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<cxd> data_;
};

inline CMatrix operator*(cxd s, const CMatrix& m) { return m * s; }

/// Stack blocks vertically; all blocks must share a column count.
inline CMatrix vstack(const std::vector<CMatrix>& blocks) {
  std::size_t rows = 0;
  const std::size_t cols = blocks.front().cols();
  for (const auto& b : blocks) rows += b.rows();
  CMatrix r(rows, cols);
  std::size_t at = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < cols; ++j) r(at + i, j) = b(i, j);
    at += b.rows();
  }
  return r;
}

/// Concatenate blocks horizontally; all blocks must share a row count.
inline CMatrix hstack(const std::vector<CMatrix>& blocks) {
  std::size_t cols = 0;
  const std::size_t rows = blocks.front().rows();
  for (const auto& b : blocks) cols += b.cols();
  CMatrix r(rows, cols);
  std::size_t at = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, at + j) = b(i, j);
    at += b.cols();
  }
  return r;
}

/// Column-stacking vectorization: a (m x n) -> (mn x 1).
inline CMatrix vec(const CMatrix& a) {
  CMatrix v(a.rows() * a.cols(), 1);
  std::size_t at = 0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) v(at++, 0) = a(i, j);
  return v;
}

/// Inverse of vec: reshape a (rows*cols x 1) column into (rows x cols).
inline CMatrix unvec(const CMatrix& v, std::size_t rows, std::size_t cols) {
  if (v.cols() != 1 || v.rows() != rows * cols) {
    throw ConfigError("unvec: size mismatch");
  }
  CMatrix a(rows, cols);
  std::size_t at = 0;
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) a(i, j) = v(at++, 0);
  return a;
}

/// Kronecker product: (ma x na) x (mb x nb) -> (ma*mb x na*nb).
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ia = 0; ia < a.rows(); ++ia)
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
      const cxd s = a(ia, ja);
      if (s == cxd{}) continue;
      for (std::size_t ib = 0; ib < b.rows(); ++ib)
        for (std::size_t jb = 0; jb < b.cols(); ++jb)
          r(ia * b.rows() + ib, ja * b.cols() + jb) = s * b(ib, jb);
    }
  return r;
}

/// Solve a*x = b by Gaussian elimination with partial pivoting.
/// Throws SingularMatrixError when a pivot drops below
/// rel_eps * (largest entry magnitude of a).
inline CMatrix solve(const CMatrix& a, const CMatrix& b,
                     const Tolerance& tol = Tolerance{}) {
  if (a.rows() != a.cols()) throw ConfigError("solve: a must be square");
  if (b.rows() != a.rows()) throw ConfigError("solve: b row count mismatch");
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  CMatrix u = a;
  CMatrix x = b;
  const double ref = a.max_abs();
  if (!(ref > 0.0)) throw SingularMatrixError("solve: zero matrix");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(u(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(u(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < tol.rel_eps * ref) {
      throw SingularMatrixError("solve: pivot below singularity threshold");
    }
    if (piv != k) {
      for (std::size_t j = k; j < n; ++j) std::swap(u(k, j), u(piv, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const cxd f = u(i, k) / u(k, k);
      if (f == cxd{}) continue;
      u(i, k) = cxd{};
      for (std::size_t j = k + 1; j < n; ++j) u(i, j) -= f * u(k, j);
      for (std::size_t j = 0; j < m; ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = 0; j < m; ++j) {
      cxd s = x(k, j);
      for (std::size_t i = k + 1; i < n; ++i) s -= u(k, i) * x(i, j);
      x(k, j) = s / u(k, k);
    }
  }
  return x;
}

inline CMatrix inverse(const CMatrix& a, const Tolerance& tol = Tolerance{}) {
  return solve(a, CMatrix::identity(a.rows()), tol);
}

namespace detail {

/// Householder QR with column pivoting: a*P = Q*R. Q is square unitary
/// (rows x rows), R upper trapezoidal with |R(0,0)| >= |R(1,1)| >= ...
/// down the pivoted diagonal. Backbone of rank and null-space decisions.
struct QrPivot {
  CMatrix q;                     // rows x rows, unitary
  CMatrix r;                     // rows x cols
  std::vector<std::size_t> piv;  // column permutation applied to a
};

inline QrPivot qr_column_pivot(const CMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  CMatrix r = a;
  CMatrix q = CMatrix::identity(m);
  std::vector<std::size_t> piv(n);
  for (std::size_t j = 0; j < n; ++j) piv[j] = j;

  std::vector<double> colnorm(n, 0.0);
  const std::size_t steps = std::min(m, n);
  for (std::size_t k = 0; k < steps; ++k) {
    // pick the remaining column with the largest trailing norm
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += std::norm(r(i, j));
      colnorm[j] = s;
    }
    std::size_t best = k;
    for (std::size_t j = k + 1; j < n; ++j)
      if (colnorm[j] > colnorm[best]) best = j;
    if (best != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(r(i, k), r(i, best));
      std::swap(piv[k], piv[best]);
    }

    // Householder reflector zeroing r(k+1..m-1, k)
    double sigma = 0.0;
    for (std::size_t i = k; i < m; ++i) sigma += std::norm(r(i, k));
    sigma = std::sqrt(sigma);
    if (sigma == 0.0) continue;
    const cxd rk = r(k, k);
    const cxd phase = (std::abs(rk) > 0.0) ? rk / std::abs(rk) : cxd{1.0};
    const cxd alpha = -phase * sigma;

    std::vector<cxd> v(m - k);
    v[0] = rk - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = r(i, k);
    double vnorm2 = 0.0;
    for (const auto& x : v) vnorm2 += std::norm(x);
    if (vnorm2 == 0.0) continue;
    const double tau = 2.0 / vnorm2;

    // apply H = I - tau*v*v^H from the left to r(k:, k:)
    for (std::size_t j = k; j < n; ++j) {
      cxd dot{};
      for (std::size_t i = k; i < m; ++i) dot += std::conj(v[i - k]) * r(i, j);
      dot *= tau;
      for (std::size_t i = k; i < m; ++i) r(i, j) -= dot * v[i - k];
    }
    r(k, k) = alpha;
    for (std::size_t i = k + 1; i < m; ++i) r(i, k) = cxd{};

    // accumulate q <- q * H (reflectors are Hermitian)
    for (std::size_t i = 0; i < m; ++i) {
      cxd dot{};
      for (std::size_t l = k; l < m; ++l) dot += q(i, l) * v[l - k];
      dot *= tau;
      for (std::size_t l = k; l < m; ++l)
        q(i, l) -= dot * std::conj(v[l - k]);
    }
  }
  return {std::move(q), std::move(r), std::move(piv)};
}

inline std::size_t rank_from_r(const CMatrix& r, double rel_eps) {
  const std::size_t d = std::min(r.rows(), r.cols());
  double largest = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    largest = std::max(largest, std::abs(r(i, i)));
  if (largest == 0.0) return 0;
  std::size_t rk = 0;
  for (std::size_t i = 0; i < d; ++i)
    if (std::abs(r(i, i)) > rel_eps * largest) ++rk;
  return rk;
}

}  // namespace detail

/// Numerical rank: pivoted-QR diagonal entries above rel_eps * largest.
inline std::size_t rank(const CMatrix& a, const Tolerance& tol = Tolerance{}) {
  const auto qr = detail::qr_column_pivot(a);
  return detail::rank_from_r(qr.r, tol.rel_eps);
}

/// Orthonormal basis of the null space of a (m x n), as an n x (n - r)
/// matrix of unit-norm mutually orthogonal columns. Each column's first
/// nonzero component is made real-positive so results are deterministic.
/// Throws EmptyNullSpaceError when the numerical rank equals n.
inline CMatrix null_space(const CMatrix& a, const Tolerance& tol = Tolerance{}) {
  const std::size_t n = a.cols();
  // QR of a^H: a = P R^H Q^H, so trailing columns of Q span null(a).
  const auto qr = detail::qr_column_pivot(a.adjoint());
  const std::size_t r = detail::rank_from_r(qr.r, tol.rel_eps);
  if (r >= n) {
    throw EmptyNullSpaceError("null_space: matrix has full column rank");
  }
  CMatrix basis(n, n - r);
  for (std::size_t j = 0; j < n - r; ++j) {
    for (std::size_t i = 0; i < n; ++i) basis(i, j) = qr.q(i, r + j);
    // phase convention: first nonzero component real-positive
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(basis(i, j));
      if (mag > 1e-12) {
        const cxd rot = std::conj(basis(i, j)) / mag;
        for (std::size_t l = 0; l < n; ++l) basis(l, j) *= rot;
        break;
      }
    }
  }
  return basis;
}

/// log2 |det(a)| via the elimination pivots. Used for log-det rates on
/// Hermitian positive-definite matrices.
inline double log2_abs_det(const CMatrix& a,
                           const Tolerance& tol = Tolerance{}) {
  if (a.rows() != a.cols()) throw ConfigError("log2_abs_det: square required");
  const std::size_t n = a.rows();
  CMatrix u = a;
  const double ref = a.max_abs();
  if (!(ref > 0.0)) throw SingularMatrixError("log2_abs_det: zero matrix");
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(u(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(u(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < tol.rel_eps * ref) {
      throw SingularMatrixError("log2_abs_det: singular");
    }
    if (piv != k)
      for (std::size_t j = k; j < n; ++j) std::swap(u(k, j), u(piv, j));
    acc += std::log2(std::abs(u(k, k)));
    for (std::size_t i = k + 1; i < n; ++i) {
      const cxd f = u(i, k) / u(k, k);
      for (std::size_t j = k + 1; j < n; ++j) u(i, j) -= f * u(k, j);
    }
  }
  return acc;
}

}  // namespace relaydof

#endif  // RELAYDOF_CMATRIX_HPP
