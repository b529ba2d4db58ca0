#pragma once

// Small dense linear algebra generic over the scalar (double or Dual).
// Sizes here are at most a few dozen, so nothing is blocked or vectorized.

#include "partlag/autodiff.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace partlag {

template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0.0)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

class RankDeficient : public std::runtime_error {
 public:
  explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

/// Householder QR of a tall matrix with full column rank. Solves least
/// squares problems against the same matrix for many right-hand sides.
template <class T>
class HouseholderQR {
 public:
  /// Throws RankDeficient when some |R_kk| <= rel_tol * |a_k|, i.e. column k
  /// is nearly inside the span of the columns before it. Independent of
  /// column scaling.
  explicit HouseholderQR(Mat<T> a, double rel_tol = 1e-12) : qr_(std::move(a)) {
    const std::size_t m = qr_.rows();
    const std::size_t n = qr_.cols();
    if (n > m) throw RankDeficient("more columns than rows");
    std::vector<double> col_norm(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < m; ++i) col_norm[k] += std::pow(scalar_value(qr_(i, k)), 2);
      col_norm[k] = std::sqrt(col_norm[k]);
    }
    beta_.assign(n, T(0.0));
    diag_.assign(n, T(0.0));
    for (std::size_t k = 0; k < n; ++k) {
      T norm2(0.0);
      for (std::size_t i = k; i < m; ++i) norm2 += qr_(i, k) * qr_(i, k);
      if (scalar_value(norm2) == 0.0) {
        throw RankDeficient("zero column " + std::to_string(k));
      }
      T norm = ad::sqrt(norm2);
      // alpha = -sign(a_kk) * ||a_k||
      T alpha = scalar_value(qr_(k, k)) >= 0.0 ? -norm : norm;
      T v0 = qr_(k, k) - alpha;
      // v = (v0, a_{k+1..m,k}); beta = 2 / v^T v
      T vtv = v0 * v0;
      for (std::size_t i = k + 1; i < m; ++i) vtv += qr_(i, k) * qr_(i, k);
      qr_(k, k) = v0;
      beta_[k] = ad::div(T(2.0), vtv);
      diag_[k] = alpha;
      for (std::size_t j = k + 1; j < n; ++j) {
        T s(0.0);
        for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * qr_(i, j);
        s = s * beta_[k];
        for (std::size_t i = k; i < m; ++i) qr_(i, j) -= s * qr_(i, k);
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (std::fabs(scalar_value(diag_[k])) <= rel_tol * col_norm[k]) {
        throw RankDeficient("column " + std::to_string(k) + " is dependent (|R_kk| = " +
                            std::to_string(std::fabs(scalar_value(diag_[k]))) + ")");
      }
    }
  }

  std::size_t rows() const noexcept { return qr_.rows(); }
  std::size_t cols() const noexcept { return qr_.cols(); }

  /// |R_kk| values, in column order.
  std::vector<double> diagonal_magnitudes() const {
    std::vector<double> out;
    for (const auto& d : diag_) out.push_back(std::fabs(scalar_value(d)));
    return out;
  }

  /// Least-squares coefficients c minimizing ||A c - b||; `residual` receives
  /// the max-norm of A c - b (real parts).
  std::vector<T> solve(std::vector<T> b, double* residual = nullptr) const {
    const std::size_t m = qr_.rows();
    const std::size_t n = qr_.cols();
    // b <- Q^T b
    for (std::size_t k = 0; k < n; ++k) {
      T s(0.0);
      for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * b[i];
      s = s * beta_[k];
      for (std::size_t i = k; i < m; ++i) b[i] -= s * qr_(i, k);
    }
    if (residual) {
      // Q^T r has zeros in the first n entries and b[n..m) below; the
      // max-norm needs r itself, so rotate the tail back.
      std::vector<double> tail(m, 0.0);
      for (std::size_t i = n; i < m; ++i) tail[i] = scalar_value(b[i]);
      for (std::size_t k = n; k-- > 0;) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += scalar_value(qr_(i, k)) * tail[i];
        s *= scalar_value(beta_[k]);
        for (std::size_t i = k; i < m; ++i) tail[i] -= s * scalar_value(qr_(i, k));
      }
      double r = 0.0;
      for (double t : tail) r = std::max(r, std::fabs(t));
      *residual = r;
    }
    std::vector<T> c(n, T(0.0));
    for (std::size_t k = n; k-- > 0;) {
      T s = b[k];
      for (std::size_t j = k + 1; j < n; ++j) s -= r_entry(k, j) * c[j];
      c[k] = ad::div(s, diag_[k]);
    }
    return c;
  }

 private:
  const T& r_entry(std::size_t k, std::size_t j) const { return qr_(k, j); }

  Mat<T> qr_;
  std::vector<T> beta_;
  std::vector<T> diag_;
};

/// Solve a square system by Gaussian elimination with partial pivoting on the
/// real parts. Throws RankDeficient on a zero pivot.
template <class T>
std::vector<T> solve_square(Mat<T> a, std::vector<T> b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(scalar_value(a(i, k))) > std::fabs(scalar_value(a(piv, k)))) piv = i;
    }
    if (scalar_value(a(piv, k)) == 0.0) throw RankDeficient("singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      T f = ad::div(a(i, k), a(k, k));
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<T> x(n, T(0.0));
  for (std::size_t k = n; k-- > 0;) {
    T s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = ad::div(s, a(k, k));
  }
  return x;
}

/// Determinant by elimination (real matrices only).
double determinant(Mat<double> a);

}  // namespace partlag
