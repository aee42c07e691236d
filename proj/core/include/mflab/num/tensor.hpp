#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mflab/errors.hpp"

namespace mflab::num {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);

/// Dense row-major array of doubles. Every dimension is positive and the
/// flat buffer always holds exactly product(shape) values.
class Tensor {
 public:
  Tensor() : Tensor(Shape{1}) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor({1}, {value}); }
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row(std::span<const double> values);
  static Tensor column(std::span<const double> values);
  static Tensor full(std::size_t rows, std::size_t cols, double value) {
    return Tensor({rows, cols}, value);
  }
  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  // 2-D view helpers; a rank-1 tensor is treated as a single row.
  std::size_t rows() const noexcept { return shape_.size() == 1 ? 1 : shape_[0]; }
  std::size_t cols() const noexcept { return shape_.back(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& vec() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  // Value of a single-element tensor.
  double item() const;

  bool all_finite() const noexcept;
  // Throws NumericError naming `context` and the first offending index.
  void check_finite(std::string_view context) const;

  Tensor reshaped(Shape shape) const;
  // Rows [begin, end) of a 2-D tensor.
  Tensor slice_rows(std::size_t begin, std::size_t end) const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b);
void require_matrix(std::string_view op, const Tensor& a);

// Stacks equally sized rows into a matrix.
Tensor stack_rows(const std::vector<std::vector<double>>& rows);
// Repeats a 1 x n (or rank-1) tensor `count` times.
Tensor repeat_row(const Tensor& row, std::size_t count);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace mflab::num
