#pragma once

// Small dense containers that work for double and nested duals alike.
// Everything here is sized for n <= a handful; no blocking, no BLAS.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vhc/dual.hpp"
#include "vhc/error.hpp"

namespace vhc {

template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0.0)) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw DimensionError("Mat: data size mismatch");
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1.0);
    return m;
  }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Mat<T> operator*(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols() != b.rows()) throw DimensionError("Mat product: inner dimensions differ");
  Mat<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
std::vector<T> operator*(const Mat<T>& a, const std::vector<T>& x) {
  if (a.cols() != x.size()) throw DimensionError("Mat-vector product: dimension mismatch");
  std::vector<T> y(a.rows(), T(0.0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

template <class T>
Mat<T> operator+(Mat<T> a, const Mat<T>& b) {
  for (std::size_t k = 0; k < a.data().size(); ++k) a.data()[k] += b.data()[k];
  return a;
}

template <class T>
Mat<T> operator-(Mat<T> a, const Mat<T>& b) {
  for (std::size_t k = 0; k < a.data().size(); ++k) a.data()[k] -= b.data()[k];
  return a;
}

/// Solve A X = B by Gaussian elimination with partial pivoting on the
/// innermost values. Throws SingularError when a pivot is below
/// `rel_tol` times the largest entry of A.
template <class T>
Mat<T> solve(Mat<T> a, Mat<T> b, double rel_tol = 1e-13) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n) throw DimensionError("solve: shape mismatch");
  double scale = 0.0;
  for (const T& x : a.data()) scale = std::max(scale, std::abs(value_of(x)));
  if (scale == 0.0) throw SingularError("solve: zero matrix");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(value_of(a(col, col)));
    for (std::size_t r = col + 1; r < n; ++r) {
      double cand = std::abs(value_of(a(r, col)));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (!(best > rel_tol * scale)) throw SingularError("solve: matrix is singular to working precision");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(piv, j));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      T f = a(r, col) / a(col, col);
      if (value_of(f) == 0.0 && !is_dual_v<T>) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) -= f * b(col, j);
    }
  }
  Mat<T> x(n, b.cols());
  for (std::size_t jj = 0; jj < b.cols(); ++jj) {
    for (std::size_t ii = n; ii-- > 0;) {
      T s = b(ii, jj);
      for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, jj);
      x(ii, jj) = s / a(ii, ii);
    }
  }
  return x;
}

template <class T>
std::vector<T> solve(const Mat<T>& a, const std::vector<T>& b, double rel_tol = 1e-13) {
  Mat<T> x = solve(a, Mat<T>(b.size(), 1, b), rel_tol);
  return x.data();
}

template <class T>
Mat<T> inverse(const Mat<T>& a) {
  return solve(a, Mat<T>::identity(a.rows()));
}

/// Rank-3 array indexed (k, i, j): Γ^k_{ij} with k the upper index.
template <class T>
struct Rank3 {
  std::size_t n = 0;
  std::vector<T> data;

  Rank3() = default;
  explicit Rank3(std::size_t dim) : n(dim), data(dim * dim * dim, T(0.0)) {}
  Rank3(std::size_t dim, std::vector<T> d) : n(dim), data(std::move(d)) {
    if (data.size() != n * n * n) throw DimensionError("Rank3: data size mismatch");
  }
  T& operator()(std::size_t k, std::size_t i, std::size_t j) { return data[(k * n + i) * n + j]; }
  const T& operator()(std::size_t k, std::size_t i, std::size_t j) const { return data[(k * n + i) * n + j]; }
};

/// Rank-4 array indexed (l, i, j, k) for R^l_{ijk}.
template <class T>
struct Rank4 {
  std::size_t n = 0;
  std::vector<T> data;

  Rank4() = default;
  explicit Rank4(std::size_t dim) : n(dim), data(dim * dim * dim * dim, T(0.0)) {}
  T& operator()(std::size_t l, std::size_t i, std::size_t j, std::size_t k) {
    return data[((l * n + i) * n + j) * n + k];
  }
  const T& operator()(std::size_t l, std::size_t i, std::size_t j, std::size_t k) const {
    return data[((l * n + i) * n + j) * n + k];
  }
};

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <class T>
std::vector<double> values_of(std::span<const T> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = value_of(v[i]);
  return out;
}

}  // namespace vhc
