#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "morphlab/numerics/rng.hpp"
#include "morphlab/numerics/tensor.hpp"

namespace morph::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Ordered, named collection of trainable tensors. Models refer to entries
/// by index so that copying a model copies its parameters.
class ParameterSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::optional<std::size_t> find(const std::string& name) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  /// L2 norm over all gradients.
  double grad_norm() const;
  void scale_grad(double factor);

 private:
  std::vector<Parameter> params_;
};

/// uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, Rng& rng);

}  // namespace morph::nn
