#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cvkan {

using Complex = std::complex<double>;

// Plain component arithmetic; avoids the libgcc NaN-recovery path of std::complex::operator*.
inline Complex complex_add(Complex a, Complex b) {
  return {a.real() + b.real(), a.imag() + b.imag()};
}

inline Complex complex_mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline double complex_abs2(Complex a) { return a.real() * a.real() + a.imag() * a.imag(); }

inline bool is_finite(Complex a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

/// Dense row-major rows x cols matrix of complex values (samples x features).
///
/// A default-constructed batch is empty; every other batch has rows >= 1 and cols >= 1.
class ComplexBatch {
 public:
  ComplexBatch() = default;
  ComplexBatch(std::size_t rows, std::size_t cols);
  ComplexBatch(std::size_t rows, std::size_t cols, std::vector<Complex> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Complex operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Complex> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Complex> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  std::vector<Complex> column(std::size_t c) const;

  bool all_finite() const;

  /// New batch holding the given rows, in order.
  ComplexBatch select_rows(std::span<const std::size_t> indices) const;
  ComplexBatch select_cols(std::span<const std::size_t> indices) const;

  bool operator==(const ComplexBatch&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

}  // namespace cvkan
