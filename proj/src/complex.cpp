#include "cvkan/complex.hpp"

#include <algorithm>
#include <string>

#include "cvkan/errors.hpp"

namespace cvkan {

ComplexBatch::ComplexBatch(std::size_t rows, std::size_t cols)
    : ComplexBatch(rows, cols, std::vector<Complex>(rows * cols)) {}

ComplexBatch::ComplexBatch(std::size_t rows, std::size_t cols, std::vector<Complex> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("ComplexBatch needs at least one row and one column");
  }
  if (data_.size() != rows * cols) {
    throw ShapeError("ComplexBatch data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(rows) + " x " + std::to_string(cols));
  }
}

std::vector<Complex> ComplexBatch::column(std::size_t c) const {
  std::vector<Complex> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

bool ComplexBatch::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Complex z) { return is_finite(z); });
}

ComplexBatch ComplexBatch::select_rows(std::span<const std::size_t> indices) const {
  std::vector<Complex> out;
  out.reserve(indices.size() * cols_);
  for (std::size_t r : indices) {
    if (r >= rows_) throw ShapeError("row index out of range");
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return ComplexBatch(indices.size(), cols_, std::move(out));
}

ComplexBatch ComplexBatch::select_cols(std::span<const std::size_t> indices) const {
  std::vector<Complex> out;
  out.reserve(rows_ * indices.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c : indices) {
      if (c >= cols_) throw ShapeError("column index out of range");
      out.push_back((*this)(r, c));
    }
  }
  return ComplexBatch(rows_, indices.size(), std::move(out));
}

}  // namespace cvkan
