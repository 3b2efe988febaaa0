#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tabsa/errors.hpp"

namespace tabsa {

using Vec = std::vector<double>;

// Column-major m x n matrix. Column j holds the embedding of token j, so the
// hot loops (X * u, X^T * w) walk contiguous memory.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  const Vec& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// X * u, with the column-weighted accumulation order fixed: columns are added
// in index order so results are bit-reproducible.
inline Vec matvec(const Matrix& x, std::span<const double> u) {
  if (u.size() != x.cols()) {
    throw InputError("matvec shape mismatch: " + std::to_string(x.cols()) +
                     " columns vs coefficient length " + std::to_string(u.size()));
  }
  Vec out(x.rows(), 0.0);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    if (u[j] == 0.0) continue;
    axpy(u[j], x.col(j), out);
  }
  return out;
}

// X^T * w
inline Vec tmatvec(const Matrix& x, std::span<const double> w) {
  if (w.size() != x.rows()) {
    throw InputError("tmatvec shape mismatch: " + std::to_string(x.rows()) +
                     " rows vs vector length " + std::to_string(w.size()));
  }
  Vec out(x.cols(), 0.0);
  for (std::size_t j = 0; j < x.cols(); ++j) out[j] = dot(x.col(j), w);
  return out;
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace tabsa
