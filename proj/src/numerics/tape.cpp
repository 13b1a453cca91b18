#include "morphlab/numerics/tape.hpp"

#include <cmath>
#include <string>

#include "morphlab/errors.hpp"

namespace morph::nn {

// ---------------------------------------------------------------------------
// ParameterSet

std::size_t ParameterSet::add(std::string name, std::size_t rows, std::size_t cols) {
  params_.push_back({std::move(name), Tensor(rows, cols), Tensor(rows, cols)});
  return params_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::optional<std::size_t> ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) {
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      p.grad = Tensor::zeros_like(p.value);
    } else {
      p.grad.set_zero();
    }
  }
}

double ParameterSet::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) sq += p.grad.mat().squaredNorm();
  return std::sqrt(sq);
}

void ParameterSet::scale_grad(double factor) {
  for (auto& p : params_) p.grad.mat() *= factor;
}

void glorot_uniform(Tensor& t, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
  for (double& v : t.data()) v = rng.uniform(-a, a);
}

// ---------------------------------------------------------------------------
// Tape

void Tape::check(Var v) const {
  if (v.index >= nodes_.size()) throw Error("Var does not belong to this tape");
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::value_at(std::uint32_t index) const {
  const Node& n = nodes_[index];
  if (n.param != nullptr) return n.param->value;
  return n.ref != nullptr ? *n.ref : n.value;
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return value_at(v.index);
}

Tensor Tape::grad(Var v) const {
  check(v);
  const Node& n = nodes_[v.index];
  if (n.param != nullptr) return n.param->grad;
  if (!n.has_grad) return Tensor::zeros_like(value_at(v.index));
  return n.grad;
}

Tensor& Tape::grad_ref(std::uint32_t index) {
  Node& n = nodes_[index];
  if (n.param != nullptr) {
    Tensor& g = n.param->grad;
    if (g.rows() != n.param->value.rows() || g.cols() != n.param->value.cols()) {
      g = Tensor::zeros_like(n.param->value);
    }
    n.has_grad = true;
    return g;
  }
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(value_at(index));
    n.has_grad = true;
  }
  return n.grad;
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.op = Op::kParameter;
  n.param = &p;
  return push(std::move(n));
}

Var Tape::frozen(const Parameter& p) {
  Node n;
  n.op = Op::kParameter;
  n.ref = &p.value;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  Node n;
  n.op = Op::kMatmul;
  n.a = a.index;
  n.b = b.index;
  n.value = nn::matmul(value_at(a.index), value_at(b.index));
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& va = value_at(a.index);
  const Tensor& vb = value_at(b.index);
  Node n;
  n.op = (va.rows() == vb.rows() && va.cols() == vb.cols()) ? Op::kAdd : Op::kAddBroadcast;
  n.a = a.index;
  n.b = b.index;
  n.value = nn::add(va, vb);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  Node n;
  n.op = Op::kMul;
  n.a = a.index;
  n.b = b.index;
  n.value = nn::mul(value_at(a.index), value_at(b.index));
  return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
  check(a);
  Node n;
  n.op = Op::kScale;
  n.a = a.index;
  n.factor = factor;
  n.value = Tensor(value_at(a.index).mat() * factor);
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  check(a);
  Node n;
  n.op = Op::kTanh;
  n.a = a.index;
  n.value = nn::tanh(value_at(a.index));
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  check(a);
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.index;
  n.value = nn::sigmoid(value_at(a.index));
  return push(std::move(n));
}

Var Tape::softmax(Var a) {
  check(a);
  Node n;
  n.op = Op::kSoftmax;
  n.a = a.index;
  n.value = nn::softmax(value_at(a.index));
  return push(std::move(n));
}

Var Tape::log_softmax(Var a) {
  check(a);
  Node n;
  n.op = Op::kLogSoftmax;
  n.a = a.index;
  n.value = nn::log_softmax(value_at(a.index));
  return push(std::move(n));
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("concat of zero tensors");
  std::vector<Tensor> values;
  values.reserve(parts.size());
  Node n;
  n.op = Op::kConcat;
  for (Var v : parts) {
    check(v);
    values.push_back(value_at(v.index));
    n.inputs.push_back(v.index);
  }
  n.value = nn::concat(values);
  return push(std::move(n));
}

Var Tape::hstack(std::span<const Var> columns) {
  if (columns.empty()) throw ShapeMismatch("hstack of zero tensors");
  Node n;
  n.op = Op::kHstack;
  const std::size_t rows = value(columns.front()).rows();
  Matrix out(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    check(columns[j]);
    const Tensor& c = value_at(columns[j].index);
    if (c.cols() != 1 || c.rows() != rows) {
      throw ShapeMismatch("hstack: shapes " + shape_string(value_at(columns.front().index)) + " and " +
                          shape_string(c) + " are incompatible");
    }
    out.col(static_cast<Eigen::Index>(j)) = c.mat().col(0);
    n.inputs.push_back(columns[j].index);
  }
  n.value = Tensor(std::move(out));
  return push(std::move(n));
}

Var Tape::slice(Var a, std::size_t begin, std::size_t count) {
  check(a);
  Node n;
  n.op = Op::kSlice;
  n.a = a.index;
  n.aux = begin;
  n.value = nn::slice(value_at(a.index), begin, count);
  return push(std::move(n));
}

Var Tape::column(Var a, std::size_t col) {
  check(a);
  const Tensor& va = value_at(a.index);
  if (col >= va.cols()) {
    throw ShapeMismatch("column " + std::to_string(col) + " out of range for " + shape_string(va));
  }
  Node n;
  n.op = Op::kColumn;
  n.a = a.index;
  n.aux = col;
  n.value = Tensor(Matrix(va.mat().col(static_cast<Eigen::Index>(col))));
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  check(a);
  Node n;
  n.op = Op::kTranspose;
  n.a = a.index;
  n.value = nn::transpose(value_at(a.index));
  return push(std::move(n));
}

Var Tape::pick(Var a, std::size_t index) {
  check(a);
  const Tensor& va = value_at(a.index);
  if (index >= va.size()) throw ShapeMismatch("pick index out of range for " + shape_string(va));
  Node n;
  n.op = Op::kPick;
  n.a = a.index;
  n.aux = index;
  n.value = Tensor::scalar(va[index]);
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  check(a);
  Node n;
  n.op = Op::kSum;
  n.a = a.index;
  n.value = Tensor::scalar(value_at(a.index).mat().sum());
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  check(loss);
  if (!value_at(loss.index).is_scalar()) {
    throw NotScalar("backward() needs a scalar loss, got " + shape_string(value_at(loss.index)));
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr) {
      n.has_grad = false;
      n.grad = Tensor();
    }
  }
  grad_ref(loss.index).mat().setConstant(1.0);

  for (std::size_t k = loss.index + 1; k-- > 0;) {
    const auto i = static_cast<std::uint32_t>(k);
    Node& n = nodes_[i];
    if (!n.has_grad || n.param != nullptr) continue;
    // Parent grad_ref() calls may not reallocate nodes_, so this reference stays valid.
    const Matrix& g = n.grad.mat();
    switch (n.op) {
      case Op::kConstant:
      case Op::kParameter:
        break;
      case Op::kMatmul: {
        const Matrix& va = value_at(n.a).mat();
        const Matrix& vb = value_at(n.b).mat();
        grad_ref(n.a).mat().noalias() += g * vb.transpose();
        grad_ref(n.b).mat().noalias() += va.transpose() * g;
        break;
      }
      case Op::kAdd:
        grad_ref(n.a).mat() += g;
        grad_ref(n.b).mat() += g;
        break;
      case Op::kAddBroadcast:
        grad_ref(n.a).mat() += g;
        grad_ref(n.b).mat().col(0) += g.rowwise().sum();
        break;
      case Op::kMul: {
        const Matrix& va = value_at(n.a).mat();
        const Matrix& vb = value_at(n.b).mat();
        grad_ref(n.a).mat() += g.cwiseProduct(vb);
        grad_ref(n.b).mat() += g.cwiseProduct(va);
        break;
      }
      case Op::kScale:
        grad_ref(n.a).mat() += g * n.factor;
        break;
      case Op::kTanh: {
        const auto y = n.value.mat().array();
        grad_ref(n.a).mat().array() += g.array() * (1.0 - y * y);
        break;
      }
      case Op::kSigmoid: {
        const auto y = n.value.mat().array();
        grad_ref(n.a).mat().array() += g.array() * y * (1.0 - y);
        break;
      }
      case Op::kSoftmax: {
        const auto y = n.value.mat().array();
        const double dot = (g.array() * y).sum();
        grad_ref(n.a).mat().array() += y * (g.array() - dot);
        break;
      }
      case Op::kLogSoftmax: {
        const auto p = n.value.mat().array().exp();
        grad_ref(n.a).mat().array() += g.array() - p * g.sum();
        break;
      }
      case Op::kConcat: {
        Eigen::Index at = 0;
        for (std::uint32_t in : n.inputs) {
          const Eigen::Index r = value_at(in).mat().rows();
          grad_ref(in).mat() += g.middleRows(at, r);
          at += r;
        }
        break;
      }
      case Op::kHstack:
        for (std::size_t j = 0; j < n.inputs.size(); ++j) {
          grad_ref(n.inputs[j]).mat().col(0) += g.col(static_cast<Eigen::Index>(j));
        }
        break;
      case Op::kSlice:
        grad_ref(n.a).mat().middleRows(static_cast<Eigen::Index>(n.aux), g.rows()) += g;
        break;
      case Op::kColumn:
        grad_ref(n.a).mat().col(static_cast<Eigen::Index>(n.aux)) += g.col(0);
        break;
      case Op::kTranspose:
        grad_ref(n.a).mat() += g.transpose();
        break;
      case Op::kPick:
        grad_ref(n.a).mat().data()[n.aux] += g(0, 0);
        break;
      case Op::kSum:
        grad_ref(n.a).mat().array() += g(0, 0);
        break;
    }
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace morph::nn
