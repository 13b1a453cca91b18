#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphlab/numerics/adadelta.hpp"
#include "morphlab/numerics/checkpoint.hpp"
#include "morphlab/numerics/parameters.hpp"
#include "morphlab/numerics/rng.hpp"
#include "morphlab/numerics/tape.hpp"
#include "morphlab/phonology.hpp"

namespace morph::ed {

using Symbols = std::vector<int>;

/// Input alphabet: PAD, BOS, EOS, the inventory phonemes, then task tags.
/// The decoder emits only EOS and phonemes, which occupy the contiguous id
/// range [kEos, kEos + phoneme_count].
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  Vocabulary(std::vector<std::string> phonemes, std::vector<std::string> tags);
  Vocabulary(const phon::Inventory& inventory, std::vector<std::string> tags);

  std::size_t size() const { return symbols_.size(); }
  std::size_t phoneme_count() const { return phoneme_count_; }
  /// EOS plus every phoneme.
  std::size_t output_size() const { return phoneme_count_ + 1; }
  const std::string& symbol(int id) const;
  std::optional<int> find(const std::string& symbol) const;
  const std::vector<std::string>& tags() const { return tags_; }
  bool is_phoneme(int id) const { return id > kEos && id <= kEos + static_cast<int>(phoneme_count_); }

  int phoneme(phon::PhonemeId p) const;
  int tag(const std::string& tag) const;
  static int output_to_symbol(std::size_t output_index) { return static_cast<int>(output_index) + kEos; }
  static std::size_t symbol_to_output(int symbol) { return static_cast<std::size_t>(symbol - kEos); }

  /// Lemma phonemes, followed by the tag symbol when one is given.
  Symbols encode_input(const phon::PhonemeString& lemma, const std::string* tag = nullptr) const;
  /// Form phonemes followed by EOS.
  Symbols encode_output(const phon::PhonemeString& form) const;
  /// Fails on any non-phoneme symbol; a trailing EOS is ignored.
  std::optional<phon::PhonemeString> to_phonemes(std::span<const int> symbols) const;
  std::string render(std::span<const int> symbols) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.symbols_ == b.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::vector<std::string> tags_;
  std::size_t phoneme_count_ = 0;
};

struct EdConfig {
  std::size_t embedding = 300;
  /// Per direction in the encoder; also the decoder and attention width.
  std::size_t hidden = 100;
  std::size_t layers = 2;
  double dropout = 0.3;
  std::uint64_t seed = 0;

  static EdConfig full_scale() { return {}; }
  static EdConfig test_scale() { return {64, 64, 2, 0.3, 0}; }

  nlohmann::json to_json() const;
  static EdConfig from_json(const nlohmann::json& j);
};

struct DecoderState {
  std::vector<nn::Var> h;
  std::vector<nn::Var> c;
  nn::Var top() const { return h.back(); }
};

struct Encoding {
  /// One context vector per input position: [forward; backward] top-layer states.
  std::vector<nn::Var> states;
  nn::Var matrix;     ///< states side by side, 2H x n
  nn::Var projected;  ///< attention projection of `matrix`, H x n
  nn::Var first_backward;
  nn::Var last_forward;
};

struct StepOutput {
  DecoderState state;
  nn::Var log_probs;  ///< over the output alphabet
  nn::Var alphas;     ///< n x 1
  nn::Var context;    ///< 2H x 1
};

class EdModel;

/// Binds a model to a tape for one forward (and optionally backward) pass.
/// A mutable model accumulates gradients into its parameters; a const model
/// is read-only.
class Session {
 public:
  Session(EdModel& model, nn::Tape& tape, nn::Rng* dropout_rng);
  Session(const EdModel& model, nn::Tape& tape);

  Encoding encode(std::span<const int> input);
  DecoderState initial_state(const Encoding& enc);
  std::pair<nn::Var, nn::Var> attend(nn::Var prev_top, const Encoding& enc);
  StepOutput step(const Encoding& enc, const DecoderState& prev, int prev_symbol);
  /// Teacher-forced sum of log-probabilities of `output` (which ends in EOS).
  nn::Var sequence_log_prob(std::span<const int> input, std::span<const int> output);

  nn::Tape& tape() { return *tape_; }

 private:
  nn::Var param(std::size_t index);
  std::pair<nn::Var, nn::Var> lstm(std::size_t weight, std::size_t bias, nn::Var x, nn::Var h, nn::Var c);
  nn::Var dropout(nn::Var x);

  const EdModel* model_;
  EdModel* mutable_model_;
  nn::Tape* tape_;
  nn::Rng* dropout_rng_;
  std::vector<std::int64_t> leaves_;
};

struct DecodeResult {
  Symbols symbols;  ///< without the final EOS
  double log_prob = 0.0;
  bool truncated = false;
};

struct TrainItem {
  Symbols input;
  Symbols output;  ///< ends with EOS
  bool regular = true;
  /// Counted in the per-epoch training accuracy curve.
  bool tracked = true;
};

struct EpochStats {
  std::size_t epoch = 0;  ///< 0 is the untrained model
  double mean_loss = 0.0;
  std::size_t correct = 0, total = 0;
  std::size_t correct_regular = 0, total_regular = 0;
  std::size_t correct_irregular = 0, total_irregular = 0;
  /// Greedy outputs for every item when snapshots are on, in dataset order.
  std::vector<Symbols> predictions;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
  double accuracy_regular() const { return total_regular == 0 ? 0.0 : static_cast<double>(correct_regular) / total_regular; }
  double accuracy_irregular() const {
    return total_irregular == 0 ? 0.0 : static_cast<double>(correct_irregular) / total_irregular;
  }
};

struct TrainOptions {
  std::size_t epochs = 100;
  std::size_t batch = 20;
  nn::AdadeltaConfig optimizer{};
  /// Rescale the minibatch gradient to this L2 norm when exceeded; 0 disables.
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  /// Greedy-decode tracked items after every epoch.
  bool track_accuracy = false;
  /// Keep every item's greedy output every `snapshot_every` epochs (0 = never).
  std::size_t snapshot_every = 0;
  /// Record an epoch-0 entry with the loss of the untrained model.
  bool record_initial = false;
  std::size_t max_output_len = 32;
  /// Stop once accuracy, when scored for an epoch, reaches this value.
  std::optional<double> stop_at_accuracy;
  std::function<void(const EpochStats&)> on_epoch;
};

class EdModel {
 public:
  EdModel(Vocabulary vocab, EdConfig config);

  const Vocabulary& vocab() const { return vocab_; }
  const EdConfig& config() const { return config_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  nn::Checkpoint to_checkpoint(nlohmann::json meta = nlohmann::json::object()) const;
  static EdModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  friend class Session;

  struct LstmLayer {
    std::size_t weight;
    std::size_t bias;
  };

  Vocabulary vocab_;
  EdConfig config_;
  nn::ParameterSet params_;
  std::size_t embedding_;
  std::vector<LstmLayer> enc_fwd_, enc_bwd_, dec_;
  std::vector<LstmLayer> init_;
  std::size_t att_state_, att_context_, att_bias_, att_v_;
  std::size_t g_weight_, g_bias_, out_weight_, out_bias_;
};

/// Context vectors h_k as tensors.
std::vector<nn::Tensor> encode(const EdModel& model, std::span<const int> input);

struct Attention {
  nn::Tensor context;
  nn::Tensor alphas;
};
/// Additive attention of a decoder state over explicit context vectors.
Attention attend(const EdModel& model, const nn::Tensor& prev_state, std::span<const nn::Tensor> contexts);

/// Output distribution g(.) for each teacher-forced step, as probabilities.
std::vector<nn::Tensor> step_distributions(const EdModel& model, std::span<const int> input,
                                           std::span<const int> output);

double sequence_log_prob(const EdModel& model, std::span<const int> input, std::span<const int> output);
/// Log-probability that the decoder emits `prefix` (no EOS required).
double prefix_log_prob(const EdModel& model, std::span<const int> input, std::span<const int> prefix);

/// Argmax each step, ties to the lowest output index.
DecodeResult greedy_decode(const EdModel& model, std::span<const int> input, std::size_t max_len);

/// Length-capped beam search over completed hypotheses, best first, without
/// length normalization. The greedy hypothesis is always scored as a
/// completed candidate, so the top result never scores below greedy.
std::vector<DecodeResult> beam_search(const EdModel& model, std::span<const int> input, std::size_t beam,
                                      std::size_t max_len);

/// Ancestral sample from g until EOS or `max_len` symbols.
DecodeResult sample(const EdModel& model, std::span<const int> input, nn::Rng& rng, std::size_t max_len);

/// Minimizes mean NLL with minibatch Adadelta. Deterministic given options.seed.
std::vector<EpochStats> train(EdModel& model, std::span<const TrainItem> data, const TrainOptions& options);

/// Mean teacher-forced NLL of the model on `data` (dropout off).
double mean_nll(const EdModel& model, std::span<const TrainItem> data);

}  // namespace morph::ed
