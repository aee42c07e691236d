#include "mflab/num/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace mflab::num {

namespace {

std::size_t checked_numel(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
    n *= d;
  }
  return n;
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  if (shape.size() == 1) os << ',';
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_numel(shape_) != data_.size()) {
    std::ostringstream os;
    os << "tensor data length " << data_.size() << " does not match shape " << shape_str(shape_);
    throw ShapeError(os.str());
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> flat;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeError("ragged matrix literal");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(flat));
}

Tensor Tensor::row(std::span<const double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::column(std::span<const double> values) {
  return Tensor({values.size(), 1}, std::vector<double>(values.begin(), values.end()));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() requires a single-element tensor, got " + shape_str(shape_));
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::check_finite(std::string_view context) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      std::ostringstream os;
      os << context << ": non-finite value " << data_[i] << " at flat index " << i << " of tensor "
         << shape_str(shape_);
      throw NumericError(os.str());
    }
  }
}

Tensor Tensor::reshaped(Shape shape) const {
  if (checked_numel(shape) != data_.size())
    throw ShapeError("reshape " + shape_str(shape_) + " -> " + shape_str(shape) + " changes size");
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > rows()) throw ShapeError("slice_rows out of range for " + shape_str(shape_));
  const std::size_t c = cols();
  return Tensor({end - begin, c},
                std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(begin * c),
                                    data_.begin() + static_cast<std::ptrdiff_t>(end * c)));
}

void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void require_matrix(std::string_view op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_str(a.shape()));
}

Tensor stack_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const std::size_t cols = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeError("stack_rows: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(flat));
}

Tensor repeat_row(const Tensor& row, std::size_t count) {
  if (row.rows() != 1) throw ShapeError("repeat_row: expected a single row, got " + shape_str(row.shape()));
  const std::size_t c = row.cols();
  Tensor out({count, c});
  for (std::size_t i = 0; i < count; ++i) std::copy(row.data().begin(), row.data().end(), out.row_span(i).begin());
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape("max_abs_diff", a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace mflab::num
