#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "rotspec/error.hpp"

namespace rotspec {

using Complex = std::complex<double>;

/// Dense column-major complex matrix.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  /// Row-major nested initializer, e.g. {{1, 2}, {3, 4}}.
  CMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.assign(rows_ * cols_, Complex{});
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != cols_) throw Error(ErrorKind::InvalidInput, "ragged matrix initializer");
      std::size_t j = 0;
      for (const auto& v : row) (*this)(i, j++) = v;
      ++i;
    }
  }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix diagonal(std::span<const Complex> values) {
    CMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i + j * rows_]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }

  std::span<Complex> column(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const Complex> column(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

  CMatrix adjoint() const {
    CMatrix out(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t i = 0; i < rows_; ++i) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  CMatrix& operator+=(const CMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  CMatrix& operator*=(Complex s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
  friend CMatrix operator*(Complex s, CMatrix a) { return a *= s; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::InvalidInput, "matrix product dimension mismatch");
    CMatrix c(a.rows_, b.cols_);
    for (std::size_t j = 0; j < b.cols_; ++j) {
      Complex* cj = c.data_.data() + j * c.rows_;
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex bkj = b(k, j);
        if (bkj == Complex{}) continue;
        const Complex* ak = a.data_.data() + k * a.rows_;
        for (std::size_t i = 0; i < a.rows_; ++i) cj[i] += ak[i] * bkj;
      }
    }
    return c;
  }

  std::vector<Complex> operator*(std::span<const Complex> x) const {
    std::vector<Complex> y(rows_);
    for (std::size_t j = 0; j < cols_; ++j) {
      const Complex xj = x[j];
      const Complex* aj = data_.data() + j * rows_;
      for (std::size_t i = 0; i < rows_; ++i) y[i] += aj[i] * xj;
    }
    return y;
  }

  Complex trace() const {
    Complex t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  std::size_t nonzeros() const {
    return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](Complex v) { return v != Complex{}; }));
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  void check_same(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::InvalidInput, "matrix dimension mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

}  // namespace rotspec
