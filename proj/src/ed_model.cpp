#include "morphlab/ed_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "morphlab/errors.hpp"

namespace morph::ed {

using nn::Tensor;
using nn::Var;

namespace {

constexpr const char* kSpecials[] = {"<PAD>", "<BOS>", "<EOS>"};

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> phonemes, std::vector<std::string> tags)
    : tags_(std::move(tags)), phoneme_count_(phonemes.size()) {
  symbols_.assign(std::begin(kSpecials), std::end(kSpecials));
  symbols_.insert(symbols_.end(), phonemes.begin(), phonemes.end());
  symbols_.insert(symbols_.end(), tags_.begin(), tags_.end());
  std::unordered_map<std::string, int> seen;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty()) throw Error("vocabulary symbol " + std::to_string(i) + " is empty");
    if (!seen.emplace(symbols_[i], static_cast<int>(i)).second) {
      throw Error("duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
  }
}

Vocabulary::Vocabulary(const phon::Inventory& inventory, std::vector<std::string> tags)
    : Vocabulary(inventory.symbols(), std::move(tags)) {}

const std::string& Vocabulary::symbol(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw UnknownSymbol("#" + std::to_string(id), 0);
  }
  return symbols_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocabulary::find(const std::string& symbol) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i] == symbol) return static_cast<int>(i);
  }
  return std::nullopt;
}

int Vocabulary::phoneme(phon::PhonemeId p) const {
  if (p >= phoneme_count_) throw UnknownSymbol("#" + std::to_string(p), 0);
  return kEos + 1 + static_cast<int>(p);
}

int Vocabulary::tag(const std::string& tag) const {
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (tags_[i] == tag) return kEos + 1 + static_cast<int>(phoneme_count_ + i);
  }
  throw UnknownSymbol(tag, 0);
}

Symbols Vocabulary::encode_input(const phon::PhonemeString& lemma, const std::string* tag) const {
  Symbols out;
  out.reserve(lemma.size() + 1);
  for (auto p : lemma.ids) out.push_back(phoneme(p));
  if (tag != nullptr) out.push_back(this->tag(*tag));
  return out;
}

Symbols Vocabulary::encode_output(const phon::PhonemeString& form) const {
  Symbols out;
  out.reserve(form.size() + 1);
  for (auto p : form.ids) out.push_back(phoneme(p));
  out.push_back(kEos);
  return out;
}

std::optional<phon::PhonemeString> Vocabulary::to_phonemes(std::span<const int> symbols) const {
  if (!symbols.empty() && symbols.back() == kEos) symbols = symbols.first(symbols.size() - 1);
  phon::PhonemeString out;
  for (int s : symbols) {
    if (!is_phoneme(s)) return std::nullopt;
    out.ids.push_back(static_cast<phon::PhonemeId>(s - kEos - 1));
  }
  return out;
}

std::string Vocabulary::render(std::span<const int> symbols) const {
  std::string out;
  for (int s : symbols) out += symbol(s);
  return out;
}

nlohmann::json Vocabulary::to_json() const {
  std::vector<std::string> phonemes(symbols_.begin() + 3, symbols_.begin() + 3 + static_cast<long>(phoneme_count_));
  return {{"phonemes", phonemes}, {"tags", tags_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  return Vocabulary(j.at("phonemes").get<std::vector<std::string>>(), j.at("tags").get<std::vector<std::string>>());
}

// ---------------------------------------------------------------------------
// EdConfig

nlohmann::json EdConfig::to_json() const {
  return {{"embedding", embedding}, {"hidden", hidden}, {"layers", layers}, {"dropout", dropout}, {"seed", seed}};
}

EdConfig EdConfig::from_json(const nlohmann::json& j) {
  EdConfig c;
  c.embedding = j.value("embedding", c.embedding);
  c.hidden = j.value("hidden", c.hidden);
  c.layers = j.value("layers", c.layers);
  c.dropout = j.value("dropout", c.dropout);
  c.seed = j.value("seed", c.seed);
  return c;
}

// ---------------------------------------------------------------------------
// EdModel

EdModel::EdModel(Vocabulary vocab, EdConfig config) : vocab_(std::move(vocab)), config_(config) {
  if (config_.embedding == 0 || config_.hidden == 0 || config_.layers == 0) {
    throw Error("embedding, hidden and layers must all be positive");
  }
  if (!(config_.dropout >= 0.0 && config_.dropout < 1.0)) throw Error("dropout must be in [0, 1)");
  if (vocab_.phoneme_count() == 0) throw Error("vocabulary has no phonemes");

  const std::size_t e = config_.embedding;
  const std::size_t h = config_.hidden;
  const std::size_t layers = config_.layers;

  embedding_ = params_.add("embedding", e, vocab_.size());
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? e : 2 * h;
    const std::string s = std::to_string(l);
    enc_fwd_.push_back({params_.add("enc.fwd." + s + ".W", 4 * h, in + h), params_.add("enc.fwd." + s + ".b", 4 * h, 1)});
    enc_bwd_.push_back({params_.add("enc.bwd." + s + ".W", 4 * h, in + h), params_.add("enc.bwd." + s + ".b", 4 * h, 1)});
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string s = std::to_string(l);
    init_.push_back({params_.add("init." + s + ".W", h, 2 * h), params_.add("init." + s + ".b", h, 1)});
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? e + 2 * h : h;
    const std::string s = std::to_string(l);
    dec_.push_back({params_.add("dec." + s + ".W", 4 * h, in + h), params_.add("dec." + s + ".b", 4 * h, 1)});
  }
  att_state_ = params_.add("att.Ws", h, h);
  att_context_ = params_.add("att.Wh", h, 2 * h);
  att_bias_ = params_.add("att.b", h, 1);
  att_v_ = params_.add("att.v", 1, h);
  g_weight_ = params_.add("g.W", h, h + 2 * h + e);
  g_bias_ = params_.add("g.b", h, 1);
  out_weight_ = params_.add("out.W", vocab_.output_size(), h);
  out_bias_ = params_.add("out.b", vocab_.output_size(), 1);

  nn::Rng rng(nn::derive_seed(config_.seed, "ed-init"));
  for (auto& p : params_) {
    // Biases stay zero.
    if (p.value.cols() > 1 || p.value.rows() == 1) nn::glorot_uniform(p.value, rng);
  }
}

nn::Checkpoint EdModel::to_checkpoint(nlohmann::json meta) const {
  meta["model"] = "ed";
  meta["vocab"] = vocab_.to_json();
  meta["config"] = config_.to_json();
  return nn::checkpoint_from(params_, std::move(meta));
}

EdModel EdModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.meta.value("model", std::string()) != "ed") throw CheckpointError("not an encoder-decoder checkpoint");
  try {
    EdModel model(Vocabulary::from_json(ckpt.meta.at("vocab")), EdConfig::from_json(ckpt.meta.at("config")));
    nn::restore_parameters(ckpt, model.params_);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad manifest: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Session

Session::Session(EdModel& model, nn::Tape& tape, nn::Rng* dropout_rng)
    : model_(&model), mutable_model_(&model), tape_(&tape), dropout_rng_(dropout_rng),
      leaves_(model.params().size(), -1) {}

Session::Session(const EdModel& model, nn::Tape& tape)
    : model_(&model), mutable_model_(nullptr), tape_(&tape), dropout_rng_(nullptr),
      leaves_(model.params().size(), -1) {}

Var Session::param(std::size_t index) {
  if (leaves_[index] < 0) {
    const Var v = mutable_model_ != nullptr ? tape_->parameter(mutable_model_->params_[index])
                                            : tape_->frozen(model_->params_[index]);
    leaves_[index] = v.index;
  }
  return Var{static_cast<std::uint32_t>(leaves_[index])};
}

Var Session::dropout(Var x) {
  const double p = model_->config_.dropout;
  if (dropout_rng_ == nullptr || p <= 0.0) return x;
  Tensor mask = Tensor::zeros_like(tape_->value(x));
  const double keep = 1.0 / (1.0 - p);
  for (double& m : mask.data()) m = dropout_rng_->bernoulli(p) ? 0.0 : keep;
  return tape_->mul(x, tape_->constant(std::move(mask)));
}

std::pair<Var, Var> Session::lstm(std::size_t weight, std::size_t bias, Var x, Var h, Var c) {
  nn::Tape& t = *tape_;
  const std::size_t n = model_->config_.hidden;
  const Var xh[] = {x, h};
  const Var z = t.add(t.matmul(param(weight), t.concat(xh)), param(bias));
  const Var i = t.sigmoid(t.slice(z, 0, n));
  const Var f = t.sigmoid(t.slice(z, n, n));
  const Var g = t.tanh(t.slice(z, 2 * n, n));
  const Var o = t.sigmoid(t.slice(z, 3 * n, n));
  const Var c2 = t.add(t.mul(f, c), t.mul(i, g));
  const Var h2 = t.mul(o, t.tanh(c2));
  return {h2, c2};
}

Encoding Session::encode(std::span<const int> input) {
  if (input.empty()) throw EmptyContext();
  const auto& vocab = model_->vocab_;
  for (std::size_t k = 0; k < input.size(); ++k) {
    const int s = input[k];
    if (s <= Vocabulary::kEos || static_cast<std::size_t>(s) >= vocab.size()) {
      throw UnknownSymbol(s >= 0 && static_cast<std::size_t>(s) < vocab.size() ? vocab.symbol(s)
                                                                               : "#" + std::to_string(s),
                          k);
    }
  }
  nn::Tape& t = *tape_;
  const std::size_t n = input.size();
  const std::size_t hidden = model_->config_.hidden;
  const Var zero = t.constant(Tensor(hidden, 1));

  std::vector<Var> xs;
  xs.reserve(n);
  for (int s : input) xs.push_back(t.column(param(model_->embedding_), static_cast<std::size_t>(s)));

  Encoding enc;
  const std::size_t layers = model_->config_.layers;
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<Var> fwd(n), bwd(n);
    Var h = zero, c = zero;
    for (std::size_t k = 0; k < n; ++k) {
      std::tie(h, c) = lstm(model_->enc_fwd_[l].weight, model_->enc_fwd_[l].bias, xs[k], h, c);
      fwd[k] = h;
    }
    h = zero;
    c = zero;
    for (std::size_t k = n; k-- > 0;) {
      std::tie(h, c) = lstm(model_->enc_bwd_[l].weight, model_->enc_bwd_[l].bias, xs[k], h, c);
      bwd[k] = h;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const Var both[] = {fwd[k], bwd[k]};
      xs[k] = t.concat(both);
    }
    if (l + 1 < layers) {
      for (auto& x : xs) x = dropout(x);
    } else {
      enc.last_forward = fwd.back();
      enc.first_backward = bwd.front();
    }
  }
  enc.states = xs;
  enc.matrix = t.hstack(enc.states);
  enc.projected = t.matmul(param(model_->att_context_), enc.matrix);
  return enc;
}

DecoderState Session::initial_state(const Encoding& enc) {
  nn::Tape& t = *tape_;
  const Var both[] = {enc.last_forward, enc.first_backward};
  const Var summary = t.concat(both);
  const Var zero = t.constant(Tensor(model_->config_.hidden, 1));
  DecoderState state;
  for (const auto& layer : model_->init_) {
    state.h.push_back(t.tanh(t.add(t.matmul(param(layer.weight), summary), param(layer.bias))));
    state.c.push_back(zero);
  }
  return state;
}

std::pair<Var, Var> Session::attend(Var prev_top, const Encoding& enc) {
  nn::Tape& t = *tape_;
  const Var q = t.add(t.matmul(param(model_->att_state_), prev_top), param(model_->att_bias_));
  const Var energy = t.tanh(t.add(enc.projected, q));
  const Var scores = t.matmul(param(model_->att_v_), energy);
  const Var alphas = t.softmax(t.transpose(scores));
  const Var context = t.matmul(enc.matrix, alphas);
  return {context, alphas};
}

StepOutput Session::step(const Encoding& enc, const DecoderState& prev, int prev_symbol) {
  nn::Tape& t = *tape_;
  StepOutput out;
  std::tie(out.context, out.alphas) = attend(prev.top(), enc);
  const Var emb = t.column(param(model_->embedding_), static_cast<std::size_t>(prev_symbol));
  const Var in[] = {emb, out.context};
  Var x = t.concat(in);
  const std::size_t layers = model_->config_.layers;
  for (std::size_t l = 0; l < layers; ++l) {
    auto [h, c] = lstm(model_->dec_[l].weight, model_->dec_[l].bias, x, prev.h[l], prev.c[l]);
    out.state.h.push_back(h);
    out.state.c.push_back(c);
    x = l + 1 < layers ? dropout(h) : h;
  }
  const Var features[] = {out.state.top(), out.context, emb};
  const Var hidden = t.tanh(t.add(t.matmul(param(model_->g_weight_), t.concat(features)), param(model_->g_bias_)));
  const Var logits = t.add(t.matmul(param(model_->out_weight_), hidden), param(model_->out_bias_));
  out.log_probs = t.log_softmax(logits);
  return out;
}

namespace {

void check_output(const Vocabulary& vocab, std::span<const int> output, bool needs_eos) {
  for (std::size_t i = 0; i < output.size(); ++i) {
    const int s = output[i];
    const bool eos_ok = s == Vocabulary::kEos && (!needs_eos || i + 1 == output.size());
    if (!vocab.is_phoneme(s) && !eos_ok) {
      throw UnknownSymbol(s >= 0 && static_cast<std::size_t>(s) < vocab.size() ? vocab.symbol(s)
                                                                               : "#" + std::to_string(s),
                          i);
    }
  }
  if (needs_eos && (output.empty() || output.back() != Vocabulary::kEos)) {
    throw Error("output sequence must end with EOS");
  }
}

}  // namespace

Var Session::sequence_log_prob(std::span<const int> input, std::span<const int> output) {
  check_output(model_->vocab_, output, true);
  nn::Tape& t = *tape_;
  const Encoding enc = encode(input);
  DecoderState state = initial_state(enc);
  int prev = Vocabulary::kBos;
  std::vector<Var> terms;
  terms.reserve(output.size());
  for (int y : output) {
    StepOutput out = step(enc, state, prev);
    terms.push_back(t.pick(out.log_probs, Vocabulary::symbol_to_output(y)));
    state = std::move(out.state);
    prev = y;
  }
  return t.sum(t.concat(terms));
}

// ---------------------------------------------------------------------------
// Inference

std::vector<Tensor> encode(const EdModel& model, std::span<const int> input) {
  nn::Tape tape;
  Session s(model, tape);
  const Encoding enc = s.encode(input);
  std::vector<Tensor> out;
  out.reserve(enc.states.size());
  for (Var v : enc.states) out.push_back(tape.value(v));
  return out;
}

Attention attend(const EdModel& model, const Tensor& prev_state, std::span<const Tensor> contexts) {
  if (contexts.empty()) throw EmptyContext();
  nn::Tape tape;
  Session s(model, tape);
  Encoding enc;
  for (const auto& h : contexts) enc.states.push_back(tape.constant(h));
  enc.matrix = tape.hstack(enc.states);
  const std::size_t wh = *model.params().find("att.Wh");
  enc.projected = tape.matmul(tape.frozen(model.params()[wh]), enc.matrix);
  auto [context, alphas] = s.attend(tape.constant(prev_state), enc);
  return {tape.value(context), tape.value(alphas)};
}

std::vector<Tensor> step_distributions(const EdModel& model, std::span<const int> input, std::span<const int> output) {
  check_output(model.vocab(), output, false);
  nn::Tape tape;
  Session s(model, tape);
  const Encoding enc = s.encode(input);
  DecoderState state = s.initial_state(enc);
  int prev = Vocabulary::kBos;
  std::vector<Tensor> out;
  for (int y : output) {
    StepOutput o = s.step(enc, state, prev);
    out.emplace_back(tape.value(o.log_probs).mat().array().exp().matrix());
    state = std::move(o.state);
    prev = y;
  }
  return out;
}

double sequence_log_prob(const EdModel& model, std::span<const int> input, std::span<const int> output) {
  nn::Tape tape;
  Session s(model, tape);
  return tape.value(s.sequence_log_prob(input, output)).item();
}

double prefix_log_prob(const EdModel& model, std::span<const int> input, std::span<const int> prefix) {
  check_output(model.vocab(), prefix, false);
  nn::Tape tape;
  Session s(model, tape);
  const Encoding enc = s.encode(input);
  DecoderState state = s.initial_state(enc);
  int prev = Vocabulary::kBos;
  double total = 0.0;
  for (int y : prefix) {
    StepOutput o = s.step(enc, state, prev);
    total += tape.value(o.log_probs)[Vocabulary::symbol_to_output(y)];
    state = std::move(o.state);
    prev = y;
  }
  return total;
}

DecodeResult greedy_decode(const EdModel& model, std::span<const int> input, std::size_t max_len) {
  nn::Tape tape;
  Session s(model, tape);
  const Encoding enc = s.encode(input);
  DecoderState state = s.initial_state(enc);
  DecodeResult result;
  int prev = Vocabulary::kBos;
  for (std::size_t i = 0; i < max_len; ++i) {
    StepOutput o = s.step(enc, state, prev);
    const Tensor& lp = tape.value(o.log_probs);
    std::size_t best = 0;
    for (std::size_t k = 1; k < lp.size(); ++k) {
      if (lp[k] > lp[best]) best = k;
    }
    result.log_prob += lp[best];
    const int sym = Vocabulary::output_to_symbol(best);
    if (sym == Vocabulary::kEos) return result;
    result.symbols.push_back(sym);
    state = std::move(o.state);
    prev = sym;
  }
  result.truncated = true;
  return result;
}

namespace {

bool ranks_before(const DecodeResult& a, const DecodeResult& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.symbols < b.symbols;
}

}  // namespace

std::vector<DecodeResult> beam_search(const EdModel& model, std::span<const int> input, std::size_t beam,
                                      std::size_t max_len) {
  if (beam == 0) throw Error("beam width must be at least 1");
  const DecodeResult greedy = greedy_decode(model, input, max_len);

  nn::Tape tape;
  Session s(model, tape);
  const Encoding enc = s.encode(input);

  struct Hyp {
    Symbols symbols;
    double score;
    DecoderState state;
  };
  struct Expansion {
    double score;
    std::size_t parent;
    std::size_t symbol;
  };

  std::vector<Hyp> active{{{}, 0.0, s.initial_state(enc)}};
  std::vector<DecodeResult> completed;
  for (std::size_t t = 0; t < max_len && !active.empty(); ++t) {
    std::vector<StepOutput> outs;
    std::vector<Expansion> expansions;
    outs.reserve(active.size());
    for (std::size_t r = 0; r < active.size(); ++r) {
      const Hyp& h = active[r];
      outs.push_back(s.step(enc, h.state, h.symbols.empty() ? Vocabulary::kBos : h.symbols.back()));
      const Tensor& lp = tape.value(outs.back().log_probs);
      for (std::size_t o = 0; o < lp.size(); ++o) expansions.push_back({h.score + lp[o], r, o});
    }
    const std::size_t keep = std::min(beam, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<long>(keep), expansions.end(),
                      [](const Expansion& a, const Expansion& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.symbol < b.symbol;
                      });
    std::vector<Hyp> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Expansion& e = expansions[i];
      const int sym = Vocabulary::output_to_symbol(e.symbol);
      if (sym == Vocabulary::kEos) {
        completed.push_back({active[e.parent].symbols, e.score, false});
      } else {
        Hyp h{active[e.parent].symbols, e.score, outs[e.parent].state};
        h.symbols.push_back(sym);
        next.push_back(std::move(h));
      }
    }
    active = std::move(next);
    if (completed.size() >= beam && !active.empty()) {
      // Scores only fall as hypotheses grow, so nothing active can overtake.
      std::vector<double> scores;
      for (const auto& c : completed) scores.push_back(c.log_prob);
      std::nth_element(scores.begin(), scores.begin() + static_cast<long>(beam - 1), scores.end(), std::greater<>());
      if (scores[beam - 1] >= active.front().score) break;
    }
  }

  if (!greedy.truncated &&
      std::none_of(completed.begin(), completed.end(), [&](const DecodeResult& c) { return c.symbols == greedy.symbols; })) {
    completed.push_back(greedy);
  }
  if (completed.empty()) {
    for (auto& h : active) completed.push_back({std::move(h.symbols), h.score, true});
  }
  std::sort(completed.begin(), completed.end(), ranks_before);
  if (completed.size() > beam) completed.resize(beam);
  return completed;
}

DecodeResult sample(const EdModel& model, std::span<const int> input, nn::Rng& rng, std::size_t max_len) {
  nn::Tape tape;
  Session s(model, tape);
  const Encoding enc = s.encode(input);
  DecoderState state = s.initial_state(enc);
  DecodeResult result;
  int prev = Vocabulary::kBos;
  for (std::size_t i = 0; i < max_len; ++i) {
    StepOutput o = s.step(enc, state, prev);
    const Tensor& lp = tape.value(o.log_probs);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = lp.size() - 1;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      acc += std::exp(lp[k]);
      if (u < acc) {
        pick = k;
        break;
      }
    }
    result.log_prob += lp[pick];
    const int sym = Vocabulary::output_to_symbol(pick);
    if (sym == Vocabulary::kEos) return result;
    result.symbols.push_back(sym);
    state = std::move(o.state);
    prev = sym;
  }
  result.truncated = true;
  return result;
}

// ---------------------------------------------------------------------------
// Training

double mean_nll(const EdModel& model, std::span<const TrainItem> data) {
  if (data.empty()) throw EmptyDataset();
  double total = 0.0;
  for (const auto& item : data) total -= sequence_log_prob(model, item.input, item.output);
  return total / static_cast<double>(data.size());
}

namespace {

void score_accuracy(const EdModel& model, std::span<const TrainItem> data, const TrainOptions& options,
                    bool snapshot, EpochStats& stats) {
  for (const auto& item : data) {
    if (!item.tracked && !snapshot) continue;
    const DecodeResult r = greedy_decode(model, item.input, options.max_output_len);
    if (snapshot) stats.predictions.push_back(r.symbols);
    if (!item.tracked) continue;
    const bool ok = !r.truncated && r.symbols.size() + 1 == item.output.size() &&
                    std::equal(r.symbols.begin(), r.symbols.end(), item.output.begin());
    ++stats.total;
    stats.correct += ok;
    if (item.regular) {
      ++stats.total_regular;
      stats.correct_regular += ok;
    } else {
      ++stats.total_irregular;
      stats.correct_irregular += ok;
    }
  }
}

}  // namespace

std::vector<EpochStats> train(EdModel& model, std::span<const TrainItem> data, const TrainOptions& options) {
  if (data.empty()) throw EmptyDataset();
  if (options.batch == 0) throw Error("batch size must be at least 1");
  for (const auto& item : data) check_output(model.vocab(), item.output, true);

  nn::Rng shuffle_rng(nn::derive_seed(options.seed, "ed-shuffle"));
  nn::Rng dropout_rng(nn::derive_seed(options.seed, "ed-dropout"));
  nn::Adadelta optimizer(options.optimizer);
  auto& params = model.params();

  std::vector<EpochStats> history;
  auto finish_epoch = [&](EpochStats& stats) {
    const bool snapshot = options.snapshot_every > 0 && stats.epoch % options.snapshot_every == 0;
    if (options.track_accuracy || snapshot) score_accuracy(model, data, options, snapshot, stats);
    if (options.on_epoch) options.on_epoch(stats);
    history.push_back(std::move(stats));
  };

  if (options.record_initial) {
    EpochStats stats;
    stats.epoch = 0;
    stats.mean_loss = mean_nll(model, data);
    finish_epoch(stats);
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::Tape tape;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch) {
      const std::size_t end = std::min(order.size(), start + options.batch);
      const double weight = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const TrainItem& item = data[order[i]];
        tape.clear();
        Session s(model, tape, &dropout_rng);
        const Var lp = s.sequence_log_prob(item.input, item.output);
        total -= tape.value(lp).item();
        tape.backward(tape.scale(lp, -weight));
      }
      if (options.clip_norm > 0.0) {
        const double norm = params.grad_norm();
        if (norm > options.clip_norm) params.scale_grad(options.clip_norm / norm);
      }
      optimizer.step(params);
    }
    tape.clear();

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = total / static_cast<double>(data.size());
    finish_epoch(stats);
    const EpochStats& last = history.back();
    if (options.stop_at_accuracy && last.total > 0 && last.accuracy() >= *options.stop_at_accuracy) break;
  }
  return history;
}

}  // namespace morph::ed
