#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ozimmu/error.hpp"

namespace ozimmu {

/// Dense row-major matrix with value semantics.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::DimensionMismatch, "matrix payload size does not match its shape");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Fp64Matrix = Matrix<double>;
using CpxMatrix = Matrix<std::complex<double>>;
using IntSliceMatrix = Matrix<std::int8_t>;
using AccMatrix = Matrix<std::int32_t>;

template <class T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

template <class T>
Matrix<T> identity(std::size_t n) {
  Matrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
  return m;
}

Fp64Matrix real_part(const CpxMatrix& m);
Fp64Matrix imag_part(const CpxMatrix& m);
CpxMatrix make_complex(const Fp64Matrix& re, const Fp64Matrix& im);
CpxMatrix conj_transpose(const CpxMatrix& m);

/// Throws NonFinite naming `what` if any entry is inf or nan.
void require_finite(const Fp64Matrix& m, const char* what);
void require_finite(const CpxMatrix& m, const char* what);

/// Throws DimensionMismatch unless a.cols() == b.rows().
void require_conformable(std::size_t a_cols, std::size_t b_rows);

std::string shape_string(std::size_t m, std::size_t n, std::size_t k);

}  // namespace ozimmu
