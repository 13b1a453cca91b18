#include "morphlab/rm_model.hpp"

#include <algorithm>
#include <numeric>

#include "morphlab/errors.hpp"
#include "morphlab/numerics/rng.hpp"

namespace morph::rm {

namespace {

Eigen::VectorXd dense(const WickelfeatureVector& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

void require_dim(const PatternAssociator& model, const WickelfeatureVector& v, const char* what) {
  if (v.size() != model.dim()) {
    throw DimensionMismatch(std::string(what) + " has length " + std::to_string(v.size()) + ", model expects " +
                            std::to_string(model.dim()));
  }
}

}  // namespace

PatternAssociator::PatternAssociator(std::size_t dim, RmConfig config)
    : config_(config), weights_(nn::Matrix::Zero(dim, dim)), bias_(Eigen::VectorXd::Zero(dim)) {
  if (config_.init_scale > 0.0) {
    nn::Rng rng(nn::derive_seed(config_.seed, "rm-init"));
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      weights_.data()[i] = rng.uniform(-config_.init_scale, config_.init_scale);
    }
    for (Eigen::Index i = 0; i < bias_.size(); ++i) bias_[i] = rng.uniform(-config_.init_scale, config_.init_scale);
  }
}

Eigen::VectorXd PatternAssociator::scores(const WickelfeatureVector& x) const {
  require_dim(*this, x, "input vector");
  Eigen::VectorXd s = bias_;
  s.noalias() += weights_ * dense(x);
  return s;
}

double PatternAssociator::learning_rate(std::size_t epoch) const {
  if (!config_.decay) return config_.learning_rate;
  return config_.learning_rate / static_cast<double>(std::max<std::size_t>(epoch, 1));
}

nn::Checkpoint PatternAssociator::to_checkpoint(nlohmann::json meta) const {
  nn::Checkpoint ckpt;
  meta["model"] = "rm";
  meta["learning_rate"] = config_.learning_rate;
  meta["decay"] = config_.decay;
  meta["init_scale"] = config_.init_scale;
  meta["seed"] = config_.seed;
  ckpt.meta = std::move(meta);
  ckpt.tensors.push_back({"W", nn::Tensor(weights_)});
  nn::Matrix b(bias_.size(), 1);
  b.col(0) = bias_;
  ckpt.tensors.push_back({"b", nn::Tensor(std::move(b))});
  return ckpt;
}

PatternAssociator PatternAssociator::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.meta.value("model", "") != "rm") throw CheckpointError("checkpoint does not hold a pattern associator");
  RmConfig config;
  config.learning_rate = ckpt.meta.value("learning_rate", 1.0);
  config.decay = ckpt.meta.value("decay", false);
  config.init_scale = 0.0;
  config.seed = ckpt.meta.value("seed", std::uint64_t{0});
  const nn::Tensor& w = ckpt.at("W");
  const nn::Tensor& b = ckpt.at("b");
  if (w.rows() != w.cols() || b.rows() != w.rows() || b.cols() != 1) {
    throw CheckpointError("pattern associator tensors have inconsistent shapes");
  }
  PatternAssociator model(w.rows(), config);
  model.weights_ = w.mat();
  model.bias_ = b.mat().col(0);
  model.config_.init_scale = ckpt.meta.value("init_scale", 1e-2);
  return model;
}

double rm_loss(const PatternAssociator& model, const WickelfeatureVector& x, const WickelfeatureVector& y) {
  require_dim(model, y, "target vector");
  const Eigen::VectorXd s = model.scores(x);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) loss += std::max(0.0, -y[static_cast<std::size_t>(j)] * s[j]);
  return loss;
}

std::size_t rm_train_step(PatternAssociator& model, const WickelfeatureVector& x, const WickelfeatureVector& y,
                          double lr) {
  require_dim(model, y, "target vector");
  const Eigen::VectorXd s = model.scores(x);
  const Eigen::VectorXd xd = dense(x);
  std::size_t updated = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double yj = y[static_cast<std::size_t>(j)];
    if (-yj * s[j] > 0.0) {
      model.weights().row(j) += (lr * yj) * xd.transpose();
      model.bias()[j] += lr * yj;
      ++updated;
    }
  }
  return updated;
}

WickelfeatureVector rm_predict_features(const PatternAssociator& model, const WickelfeatureVector& x) {
  const Eigen::VectorXd s = model.scores(x);
  WickelfeatureVector out(model.dim());
  for (Eigen::Index j = 0; j < s.size(); ++j) out.set(static_cast<std::size_t>(j), s[j] > 0.0);
  return out;
}

PhonemeString rm_decode(const PatternAssociator& model, const PhonemeString& x, const CandidateSet& cands,
                        const phon::FeatureTable& table) {
  if (cands.candidates.empty()) throw EmptyCandidates();
  const WickelfeatureVector predicted = rm_predict_features(model, phon::pi(x, table));
  std::size_t best = 0;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < cands.candidates.size(); ++i) {
    const std::size_t d = phon::hamming(phon::pi(cands.candidates[i], table), predicted);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return cands.candidates[best];
}

CandidateSet generate_candidates(const PhonemeString& x, const IrregularLexicon& irregulars,
                                 const RegularRules& rules) {
  CandidateSet out;
  auto push = [&](PhonemeString c) {
    if (std::find(out.candidates.begin(), out.candidates.end(), c) == out.candidates.end()) {
      out.candidates.push_back(std::move(c));
    }
  };
  push(x);
  for (const auto& suffix : rules.past_suffixes()) push(x + suffix);
  const PhonemeString rime = rules.rime(x);
  for (const auto& [stem, form] : irregulars.entries()) {
    if (rules.rime(stem) != rime) continue;
    if (auto analog = StemChange::between(stem, form).apply(x)) push(std::move(*analog));
  }
  return out;
}

std::vector<RmEpochStats> rm_train(PatternAssociator& model, std::span<const WickelfeatureVector> xs,
                                   std::span<const WickelfeatureVector> ys, std::size_t epochs,
                                   std::uint64_t shuffle_seed) {
  if (xs.size() != ys.size()) throw DimensionMismatch("rm_train: input and target counts differ");
  if (xs.empty()) throw EmptyDataset();
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Rng rng(nn::derive_seed(shuffle_seed, "rm-shuffle"));
  std::vector<RmEpochStats> stats;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    if (shuffle_seed != 0) rng.shuffle(order);
    const double lr = model.learning_rate(epoch);
    RmEpochStats s;
    s.epoch = epoch;
    for (std::size_t i : order) s.updates += rm_train_step(model, xs[i], ys[i], lr);
    for (std::size_t i = 0; i < xs.size(); ++i) s.mean_loss += rm_loss(model, xs[i], ys[i]);
    s.mean_loss /= static_cast<double>(xs.size());
    stats.push_back(s);
  }
  return stats;
}

}  // namespace morph::rm
