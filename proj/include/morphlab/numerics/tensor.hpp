#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace morph::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense row-major matrix. Vectors are column vectors (n x 1) and scalars are
/// 1 x 1; nothing here needs more than two dimensions.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols) : m_(Matrix::Zero(rows, cols)) {}
  explicit Tensor(Matrix m) : m_(std::move(m)) {}

  static Tensor scalar(double v);
  static Tensor column(std::span<const double> values);
  static Tensor column(std::initializer_list<double> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.rows(), t.cols()); }

  std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(m_.size()); }
  std::vector<std::size_t> shape() const { return {rows(), cols()}; }
  bool empty() const { return m_.size() == 0; }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }

  double& operator()(std::size_t r, std::size_t c) { return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)); }
  double operator()(std::size_t r, std::size_t c) const { return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)); }
  /// Flat row-major access.
  double& operator[](std::size_t i) { return m_.data()[i]; }
  double operator[](std::size_t i) const { return m_.data()[i]; }
  double item() const;

  std::span<double> data() { return {m_.data(), size()}; }
  std::span<const double> data() const { return {m_.data(), size()}; }

  Matrix& mat() { return m_; }
  const Matrix& mat() const { return m_; }

  bool all_finite() const { return m_.allFinite(); }
  void set_zero() { m_.setZero(); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

std::string shape_string(const Tensor& t);

/// Throws ShapeMismatch naming both shapes unless they agree.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Eager primitives. The autodiff tape builds on these for its forward pass.
Tensor matmul(const Tensor& a, const Tensor& b);
/// Same shapes, or a matrix plus a column vector added to every column.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// Softmax over every entry of the tensor.
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);
/// Stacks tensors with equal column counts vertically.
Tensor concat(std::span<const Tensor> parts);
/// Rows [begin, begin + count).
Tensor slice(const Tensor& a, std::size_t begin, std::size_t count);
Tensor transpose(const Tensor& a);

}  // namespace morph::nn
