#pragma once

#include <vector>

#include "morphlab/numerics/parameters.hpp"
#include "morphlab/numerics/tensor.hpp"

namespace morph::nn {

struct AdadeltaConfig {
  double rho = 0.95;
  double eps = 1e-6;
  double lr = 1.0;
};

/// Running averages E[g^2] and E[dx^2] for one tensor.
struct AdadeltaState {
  Tensor sq_grad;
  Tensor sq_delta;
};

/// One Adadelta update of `param` in place:
///   E[g^2]  <- rho E[g^2]  + (1 - rho) g^2
///   dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
///   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
///   param   <- param + lr * dx
/// Empty state tensors are initialized to zero.
void adadelta_step(Tensor& param, const Tensor& grad, AdadeltaState& state, const AdadeltaConfig& config);

class Adadelta {
 public:
  explicit Adadelta(AdadeltaConfig config = {}) : config_(config) {}

  void step(ParameterSet& params);
  const AdadeltaConfig& config() const { return config_; }
  const std::vector<AdadeltaState>& state() const { return state_; }

 private:
  AdadeltaConfig config_;
  std::vector<AdadeltaState> state_;
};

}  // namespace morph::nn
