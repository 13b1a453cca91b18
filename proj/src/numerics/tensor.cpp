#include "morphlab/numerics/tensor.hpp"

#include <cmath>

#include "morphlab/errors.hpp"

namespace morph::nn {

Tensor Tensor::scalar(double v) {
  Tensor t(1, 1);
  t(0, 0) = v;
  return t;
}

Tensor Tensor::column(std::span<const double> values) {
  Tensor t(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) t[i] = values[i];
  return t;
}

Tensor Tensor::column(std::initializer_list<double> values) {
  return column(std::span<const double>(values.begin(), values.size()));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Tensor t(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeMismatch("from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) t(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor Tensor::identity(std::size_t n) { return Tensor(Matrix::Identity(n, n)); }

double Tensor::item() const {
  if (!is_scalar()) throw NotScalar("item() on tensor of shape " + shape_string(*this));
  return m_(0, 0);
}

std::string shape_string(const Tensor& t) {
  return "[" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(op) + ": shapes " + shape_string(a) + " and " + shape_string(b) +
                        " are incompatible");
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul: shapes " + shape_string(a) + " and " + shape_string(b) + " are incompatible");
  }
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.mat() * b.mat();
  return Tensor(std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Tensor(a.mat() + b.mat());
  if (b.cols() == 1 && a.rows() == b.rows()) {
    Matrix out = a.mat();
    out.colwise() += b.mat().col(0);
    return Tensor(std::move(out));
  }
  throw ShapeMismatch("add: shapes " + shape_string(a) + " and " + shape_string(b) + " are incompatible");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return Tensor(a.mat().cwiseProduct(b.mat()));
}

Tensor tanh(const Tensor& a) { return Tensor(a.mat().array().tanh().matrix()); }

Tensor sigmoid(const Tensor& a) {
  Matrix out = a.mat();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double x = out.data()[i];
    // Split on sign so exp never overflows.
    out.data()[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return Tensor(std::move(out));
}

Tensor softmax(const Tensor& a) {
  if (a.empty()) throw ShapeMismatch("softmax of an empty tensor");
  Matrix out = (a.mat().array() - a.mat().maxCoeff()).exp().matrix();
  out /= out.sum();
  return Tensor(std::move(out));
}

Tensor log_softmax(const Tensor& a) {
  if (a.empty()) throw ShapeMismatch("log_softmax of an empty tensor");
  const double m = a.mat().maxCoeff();
  const double lse = m + std::log((a.mat().array() - m).exp().sum());
  return Tensor((a.mat().array() - lse).matrix());
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeMismatch("concat of zero tensors");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw ShapeMismatch("concat: shapes " + shape_string(parts.front()) + " and " + shape_string(p) +
                          " are incompatible");
    }
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.mat().rows()) = p.mat();
    at += p.mat().rows();
  }
  return Tensor(std::move(out));
}

Tensor slice(const Tensor& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows()) {
    throw ShapeMismatch("slice: rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                        ") out of range for " + shape_string(a));
  }
  return Tensor(Matrix(a.mat().middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count))));
}

Tensor transpose(const Tensor& a) { return Tensor(Matrix(a.mat().transpose())); }

}  // namespace morph::nn
