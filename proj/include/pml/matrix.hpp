#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace pml {

// Dense row-major matrix of doubles. Kept deliberately small: just what the
// trainer and metrics need, with shape checks that throw std::invalid_argument.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Convenience builder for tests and fixtures: Matrix::of({{1,2},{3,4}}).
  static Matrix of(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Axis { rows, cols, all };

// c = a * b; throws std::invalid_argument on inner-dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// Elementwise; shape mismatches throw std::invalid_argument.
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

// Branches on sign so large |x| neither overflows nor loses the subnormal
// tail: x >= 0 uses 1/(1+exp(-x)), x < 0 uses exp(x)/(1+exp(x)).
double stable_sigmoid(double x);
Matrix sigmoid(const Matrix& a);
Matrix relu(const Matrix& a);

// Axis::rows -> column vector of row sums (n x 1); Axis::cols -> row vector of
// column sums (1 x n); Axis::all -> 1 x 1 total. Empty inputs sum to 0.
Matrix reduce_sum(const Matrix& a, Axis axis);

}  // namespace pml
