#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "morphlab/numerics/parameters.hpp"
#include "morphlab/numerics/tensor.hpp"

namespace morph::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t index = 0;
};

/// Append-only record of primitive operations for reverse-mode
/// differentiation. Insertion order is a topological order, so backward()
/// is a single reverse sweep.
///
/// Parameter leaves accumulate straight into Parameter::grad; call
/// ParameterSet::zero_grad() between optimizer steps.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// The parameter must outlive the tape and must not move while recorded.
  Var parameter(Parameter& p);
  /// Read-only leaf: participates in backward but never writes Parameter::grad.
  Var frozen(const Parameter& p);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() target; zero when unreachable.
  Tensor grad(Var v) const;

  Var matmul(Var a, Var b);
  /// Same shapes, or matrix plus a column vector broadcast over columns.
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var softmax(Var a);
  Var log_softmax(Var a);
  Var concat(std::span<const Var> parts);
  /// Places column vectors side by side.
  Var hstack(std::span<const Var> columns);
  Var slice(Var a, std::size_t begin, std::size_t count);
  /// Column `col` of a matrix as a column vector (embedding lookup).
  Var column(Var a, std::size_t col);
  Var transpose(Var a);
  /// Flat element `index` as a scalar.
  Var pick(Var a, std::size_t index);
  Var sum(Var a);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every recorded node.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }
  void clear();

 private:
  enum class Op : std::uint8_t {
    kConstant,
    kParameter,
    kMatmul,
    kAdd,
    kAddBroadcast,
    kMul,
    kScale,
    kTanh,
    kSigmoid,
    kSoftmax,
    kLogSoftmax,
    kConcat,
    kHstack,
    kSlice,
    kColumn,
    kTranspose,
    kPick,
    kSum,
  };

  struct Node {
    Op op = Op::kConstant;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::size_t aux = 0;
    double factor = 0.0;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    Parameter* param = nullptr;
    const Tensor* ref = nullptr;
    std::vector<std::uint32_t> inputs;
  };

  Var push(Node node);
  Tensor& grad_ref(std::uint32_t index);
  const Tensor& value_at(std::uint32_t index) const;
  void check(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace morph::nn
