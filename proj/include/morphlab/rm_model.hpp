#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "morphlab/morphology.hpp"
#include "morphlab/numerics/checkpoint.hpp"
#include "morphlab/numerics/tensor.hpp"
#include "morphlab/phonology.hpp"

namespace morph::rm {

using phon::WickelfeatureVector;

struct RmConfig {
  double learning_rate = 1.0;
  /// Scale the rate by 1/epoch (1-based) instead of keeping it fixed.
  bool decay = false;
  /// Weights and biases start uniform in [-init_scale, init_scale]. With an
  /// all-zero start every margin is exactly 0 and the margin-0 hinge never
  /// produces an update.
  double init_scale = 1e-2;
  std::uint64_t seed = 0;
};

/// Single-layer linear map between Wickelfeature spaces, trained per feature
/// with the perceptron rule on the margin-0 hinge loss.
class PatternAssociator {
 public:
  PatternAssociator(std::size_t dim, RmConfig config = {});

  std::size_t dim() const { return static_cast<std::size_t>(bias_.size()); }
  const RmConfig& config() const { return config_; }
  nn::Matrix& weights() { return weights_; }
  const nn::Matrix& weights() const { return weights_; }
  Eigen::VectorXd& bias() { return bias_; }
  const Eigen::VectorXd& bias() const { return bias_; }

  /// W x + b.
  Eigen::VectorXd scores(const WickelfeatureVector& x) const;
  double learning_rate(std::size_t epoch) const;

  nn::Checkpoint to_checkpoint(nlohmann::json meta = nlohmann::json::object()) const;
  static PatternAssociator from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  RmConfig config_;
  nn::Matrix weights_;
  Eigen::VectorXd bias_;
};

/// ||max{0, -y ⊙ (W x + b)}||_1.
double rm_loss(const PatternAssociator& model, const WickelfeatureVector& x, const WickelfeatureVector& y);

/// For every coordinate j with positive loss: W_j += lr y_j x, b_j += lr y_j.
/// Returns the number of coordinates updated.
std::size_t rm_train_step(PatternAssociator& model, const WickelfeatureVector& x, const WickelfeatureVector& y,
                          double lr);

/// threshold{W x + b}: positive -> +1, otherwise -1.
WickelfeatureVector rm_predict_features(const PatternAssociator& model, const WickelfeatureVector& x);

struct CandidateSet {
  std::vector<PhonemeString> candidates;
};

/// The candidate whose encoding is closest in Hamming distance to the
/// thresholded prediction; ties go to the earliest candidate.
PhonemeString rm_decode(const PatternAssociator& model, const PhonemeString& x, const CandidateSet& cands,
                        const phon::FeatureTable& table);

/// Identity, the three regular suffixations, then analogs of attested
/// irregulars whose stems share the final rime of `x`. Deduplicated, in that
/// order.
CandidateSet generate_candidates(const PhonemeString& x, const IrregularLexicon& irregulars,
                                 const RegularRules& rules);

struct RmEpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::size_t updates = 0;
};

/// Trains on (x, y) vector pairs in the given order for `epochs` passes.
std::vector<RmEpochStats> rm_train(PatternAssociator& model, std::span<const WickelfeatureVector> xs,
                                   std::span<const WickelfeatureVector> ys, std::size_t epochs,
                                   std::uint64_t shuffle_seed = 0);

}  // namespace morph::rm
