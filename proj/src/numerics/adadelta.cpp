#include "morphlab/numerics/adadelta.hpp"

#include "morphlab/errors.hpp"

namespace morph::nn {

void adadelta_step(Tensor& param, const Tensor& grad, AdadeltaState& state, const AdadeltaConfig& config) {
  require_same_shape(param, grad, "adadelta_step");
  if (state.sq_grad.empty()) state.sq_grad = Tensor::zeros_like(param);
  if (state.sq_delta.empty()) state.sq_delta = Tensor::zeros_like(param);
  require_same_shape(param, state.sq_grad, "adadelta_step");
  require_same_shape(param, state.sq_delta, "adadelta_step");

  auto g = grad.mat().array();
  auto eg = state.sq_grad.mat().array();
  auto ed = state.sq_delta.mat().array();
  eg = config.rho * eg + (1.0 - config.rho) * g * g;
  const auto delta = (-((ed + config.eps).sqrt() / (eg + config.eps).sqrt()) * g).eval();
  ed = config.rho * ed + (1.0 - config.rho) * delta * delta;
  param.mat().array() += config.lr * delta;
}

void Adadelta::step(ParameterSet& params) {
  if (state_.size() != params.size()) state_.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    adadelta_step(params[i].value, params[i].grad, state_[i], config_);
  }
}

}  // namespace morph::nn
